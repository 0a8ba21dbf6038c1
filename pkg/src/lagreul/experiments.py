"""Audit suites shared by the command line and the acceptance tests.

Every suite takes a :class:`Setup` (grid, regularity indices, viscosity, seed)
plus its own options and returns a list of :class:`BoundAudit` records.
"""
from dataclasses import dataclass, replace

import numpy as np

from . import calibration
from .audit import FAIL, PASS, BoundAudit, fit_exponent
from .commutators import (
    OuterSquare,
    commutator_G,
    commutator_G_audit,
    commutator_U,
    commutator_U_audit,
    cz_audit,
    variation_identity_check,
)
from .data import (
    alpha_cone,
    constant_tensor,
    gaussian_tensor,
    gaussian_vortex,
    random_solenoidal,
    random_symmetric,
)
from .errors import ConfigError
from .flowmap import FlowMap, audit_composition_bounds
from .grid import Grid, gradient, remove_nyquist
from .kernels import (
    heat_mass_audits,
    k_lemma_sweep,
    kernel_l1_norms,
    kernel_scaling_audits,
    s_profile_rescaling_audit,
    HeatKernelSpec,
)
from .operators import (
    PathField,
    audit_G_bound,
    duhamel_G_values,
    duhamel_U_audit,
    duhamel_U_values,
    gamma_values,
    heat_contraction_audit,
    heat_gradient_audit,
    riesz_leray_contract,
)
from .solver import (
    ModelParams,
    SolverConfig,
    contraction_probe,
    data_radius,
    lipschitz_probe,
    picard_solve,
    select_radius_and_horizon,
)
from .spaces import HolderParams, field_norm, field_path_norms, holder_seminorm, linf_norm


@dataclass(frozen=True)
class Setup:
    """Discretisation and indices shared by every suite of one run."""

    d: int = 2
    n: int = 128
    L: float = 2 * np.pi
    alpha: float = 0.5
    p: float = 2.0
    nu: float = 0.2
    seed: int = 0

    @property
    def grid(self):
        return Grid(self.d, self.n, self.L)

    @property
    def holder(self):
        return HolderParams(alpha=self.alpha, p=self.p, seed=self.seed)

    def rng(self, offset=0):
        return np.random.default_rng(self.seed + offset)


def _time_path(grid, T, steps, rng, width=0.8):
    """Symmetric tensor path ``s0 + t s1 + t^2 s2`` with Nyquist-free samples."""
    t = np.linspace(0.0, T, steps + 1).reshape((-1,) + (1,) * (grid.d + 2))
    s = [random_symmetric(grid, rng, width) for _ in range(3)]
    return remove_nyquist(s[0][None] + t * s[1][None] + t**2 * s[2][None], grid)


def _random_flow(grid, T, steps, rng, speed=0.3, scheme="trig"):
    """Flow ``X = a + t w(a) + t^2 w2(a)`` with smooth localized divergence-free ``w``."""
    t = np.linspace(0.0, T, steps + 1).reshape((-1, 1) + (1,) * grid.d)
    w1, w2 = speed * random_solenoidal(grid, rng), speed * random_solenoidal(grid, rng)
    return FlowMap(grid, t * w1[None] + t**2 * w2[None], T, scheme=scheme)


# -- kernels ------------------------------------------------------------------------

def kernel_suite(setup, k_speeds=(0.5, 1.0, 2.0), k_nus=(0.5, 1.0), k_lags=(0.02, 0.04, 0.08, 0.16)):
    audits = heat_mass_audits(nus=(0.1, 1.0), ts=np.logspace(-3, 0, 7), d=setup.d)
    audits += kernel_scaling_audits(nu=1.0, d=setup.d)
    audits += k_lemma_exponent_audits(k_nus, k_speeds, k_lags, setup.d)
    audits.append(s_profile_rescaling_audit(setup.nu, 0.3, d=setup.d, seed=setup.seed))
    return audits


def k_lemma_exponent_audits(nus, speeds, lags, d=2, T=1.0, tol=0.1):
    """Per-point lemma audits plus one exponent audit per ``(nu, v)`` on ``sup_x int |K| dz``."""
    point = k_lemma_sweep(nus, speeds, lags, calibration.constant("k_lemma"), T=T, d=d)
    out = list(point)
    seen = {}
    for a in point:
        seen.setdefault((a.sweep["nu"], a.sweep["speed"]), a.exponent_fit)
    for (nu, speed), slope in seen.items():
        out.append(
            BoundAudit(
                "kernels.k_lemma_exponent",
                abs(slope + 0.5),
                tol,
                sweep={"nu": nu, "speed": speed, "lags": list(lags)},
                exponent_fit=slope,
            )
        )
    return out


# -- operators ----------------------------------------------------------------------

def operator_identity_errors(setup, trials=20, T=0.25, steps=8):
    """Relative gaps among ``G``, spectral ``grad U`` and ``-(R (x) R) H Gamma`` on random stress paths."""
    grid = setup.grid
    rng = setup.rng(1)
    dt = T / steps
    errors = []
    for _ in range(trials):
        sig = _time_path(grid, T, steps, rng)
        G = duhamel_G_values(sig, grid, setup.nu, dt)
        U = duhamel_U_values(sig, grid, setup.nu, dt)
        gradU = np.stack([gradient(u, grid) for u in U])
        gam = gamma_values(sig, grid, setup.nu, dt)
        RRH = np.stack([riesz_leray_contract(g, grid) for g in gam])
        scale = np.abs(G).max()
        errors.append(max(np.abs(G - gradU).max(), np.abs(G - RRH).max()) / scale)
    return errors


def operator_suite(setup, trials=20, T=0.25, steps=8):
    grid = setup.grid
    rng = setup.rng(2)
    errors = operator_identity_errors(setup, trials, T, steps)
    audits = [
        BoundAudit("operators.identity_G", max(errors), 1e-8, sweep={"trials": trials}, details={"errors": errors})
    ]
    u0 = gaussian_vortex(grid, 0.5, 0.5)
    times = np.geomspace(1e-3, 0.5, 6)
    audits.append(heat_contraction_audit(u0, grid, setup.nu, times, setup.holder))
    audits.append(heat_gradient_audit(u0, grid, setup.nu, times, calibration.constant("heat_gradient"), setup.holder))
    tau = PathField(grid, _time_path(grid, T, steps, rng), T)
    audits.append(duhamel_U_audit(tau, setup.nu, calibration.constant("duhamel_U"), setup.holder))
    flow = _random_flow(grid, T, steps, rng)
    audits.append(audit_G_bound(tau, flow, setup.nu, calibration.constant("theorem_G"), setup.holder, "trig"))
    return audits


# -- flow maps ----------------------------------------------------------------------

def flowmap_suite(setup, T=0.25, steps=8, solver_flow=None, slack=0.05):
    """Composition audits on a translation flow and a solver-produced flow (or a smooth stand-in)."""
    grid = setup.grid
    rng = setup.rng(3)
    tau = _time_path(grid, T, steps, rng)
    x_prime = np.linspace(0.0, T, steps + 1).reshape((-1, 1) + (1,) * grid.d) * random_solenoidal(grid, rng)[None]
    flows = {"translation": FlowMap.translation(grid, (0.7,) + (0.3,) * (grid.d - 1), steps, T)}
    if solver_flow is None:
        solver_flow = solved_flow(setup, T, steps)
    flows["solver"] = solver_flow
    audits = []
    for name, flow in flows.items():
        tau_f = tau if flow.steps == steps else _time_path(grid, flow.T, flow.steps, rng)
        xp = x_prime if flow.steps == steps else np.linspace(0.0, flow.T, flow.steps + 1).reshape(
            (-1, 1) + (1,) * grid.d) * random_solenoidal(grid, rng)[None]
        for a in audit_composition_bounds(flow, xp, tau_f, params=setup.holder, slack=slack):
            a.sweep["flow"] = name
            audits.append(a)
        audits.append(BoundAudit("flowmap.inverse_residual", max(flow.inverse_residual(j) for j in range(flow.steps + 1)),
                                 1e-8, sweep={"flow": name}))
    return audits


def default_data(grid, model="oldroyd_b", amplitude=0.5):
    u0 = gaussian_vortex(grid, amplitude, 0.5)
    if model == "mhd":
        sigma0 = gaussian_vortex(grid, amplitude, 0.6, center=np.full(grid.d, grid.L / 2) + 0.3)
    else:
        sigma0 = gaussian_tensor(grid, amplitude, 0.6)
    return u0, sigma0


def solved_flow(setup, T=0.25, steps=8, k=0.5, rho_k=0.5):
    """The converged flow map of the default Oldroyd-B data."""
    grid = setup.grid
    u0, sigma0 = default_data(grid)
    params = ModelParams(nu=setup.nu, k=k, rho_k=rho_k, alpha=setup.alpha, p=setup.p, T=T, steps=steps)
    config = SolverConfig(ball_radius=data_radius(grid, u0, sigma0, params), scheme="trig")
    state, _ = picard_solve(grid, u0, sigma0, params, config)
    return state.flow


# -- commutators ------------------------------------------------------------------------

def commutator_dual_errors(setup, trials=20, T=0.25, steps=6):
    """Relative gaps between direct and decomposed forms of both commutators."""
    grid = setup.grid
    rng = setup.rng(4)
    errs_U, errs_G = [], []
    for _ in range(trials):
        sig = _time_path(grid, T, steps, rng)
        flow = _random_flow(grid, T, steps, rng)
        t = np.linspace(0.0, T, steps + 1).reshape((-1, 1) + (1,) * grid.d)
        eta = remove_nyquist(t * random_solenoidal(grid, rng)[None] + 0.2 * random_solenoidal(grid, rng)[None], grid)
        dt = T / steps
        a = commutator_U(eta, sig, setup.nu, steps, "direct", dt, grid)
        b = commutator_U(eta, sig, setup.nu, steps, "decomposed", dt, grid)
        errs_U.append(float(np.abs(a - b).max() / np.abs(a).max()))
        a = commutator_G(eta, sig, flow, setup.nu, steps, "direct")
        b = commutator_G(eta, sig, flow, setup.nu, steps, "decomposed")
        errs_G.append(float(np.abs(a - b).max() / np.abs(a).max()))
    return errs_U, errs_G


def variation_audits(setup, n=64, T=0.2, steps=8):
    """Variation identity along a segment of flows, for a stress path and for ``v (x) v``."""
    grid = Grid(setup.d, n, setup.L)
    rng = setup.rng(5)
    flow1 = _random_flow(grid, T, steps, rng, 0.2)
    flow2 = _random_flow(grid, T, steps, rng, 0.2)
    tau1 = _time_path(grid, T, steps, rng)
    tau2 = _time_path(grid, T, steps, rng)
    full = variation_identity_check(flow1.displacement, flow2.displacement, tau1, tau2, grid, T, setup.nu)
    full.sweep["case"] = "stress"
    t = np.linspace(0.0, T, steps + 1).reshape((-1, 1) + (1,) * grid.d)
    v1 = t * random_solenoidal(grid, rng)[None] + random_solenoidal(grid, rng)[None]
    v2 = t * random_solenoidal(grid, rng)[None] + random_solenoidal(grid, rng)[None]
    quad = variation_identity_check(flow1.displacement, flow2.displacement, v1, v2, grid, T, setup.nu,
                                    tau_map=OuterSquare())
    quad.sweep["case"] = "outer_square"
    return [full, quad]


def commutator_suite(setup, trials=20, variation=True):
    errs_U, errs_G = commutator_dual_errors(setup, trials)
    audits = [
        BoundAudit("commutators.dual_form_U", max(errs_U), 1e-6, sweep={"trials": trials}, details={"errors": errs_U}),
        BoundAudit("commutators.dual_form_G", max(errs_G), 1e-5, sweep={"trials": trials}, details={"errors": errs_G}),
    ]
    ref = calibration.reference_problem(setup.seed + 1, n=min(setup.n, 64))
    audits.append(cz_audit(ref.eta[-1], "riesz_0_1", ref.tau.values[-1], ref.grid, calibration.constant("cz")))
    sigma = ref.flow.compose_path(ref.tau.values, "inverse")
    audits.append(commutator_U_audit(ref.eta, sigma, ref.x_prime, ref.flow, ref.nu, calibration.constant("commutator_U")))
    audits.append(commutator_G_audit(ref.eta, ref.tau.values, ref.x_prime, ref.flow, ref.nu,
                                     calibration.constant("commutator_G"), scheme="trig"))
    if variation:
        audits += variation_audits(setup)
    return audits


# -- solver --------------------------------------------------------------------------------

def contraction_suite(setup, steps=8, states=10, probe_trials=3, trials=4, halvings=3, amplitude=0.5, k=0.5, rho_k=0.5):
    """(Gamma, T) search, ball invariance at the selected pair, and the contraction probe with its T sweep."""
    grid = setup.grid
    u0, sigma0 = default_data(grid, amplitude=amplitude)
    params = ModelParams(nu=setup.nu, k=k, rho_k=rho_k, alpha=setup.alpha, p=setup.p, T=1.0, steps=steps)
    config = SolverConfig(scheme="spline")
    sel = select_radius_and_horizon(grid, u0, sigma0, params, config, states=states, probe_trials=probe_trials,
                                    seed=setup.seed)
    cfg = replace(config, ball_radius=sel.ball_radius)
    chosen = params.with_horizon(sel.T)
    last = sel.history[-1]
    audits = [
        BoundAudit("solver.ball_invariance", max(last["image_norms"]), sel.ball_radius,
                   sweep={"T": sel.T}, details={"image_norms": last["image_norms"], "history": sel.history}),
    ]
    probe = contraction_probe(grid, u0, sigma0, chosen, cfg, trials=trials, seed=setup.seed + 7, halvings=halvings)
    audits.append(probe)
    audits.append(calibration.audit("velocity_growth", setup.seed + 1))
    return audits


def relaxation_suite(setup, c=1.0, k=0.1, T=0.5, steps=32):
    """Relaxation-only Picard run against ``c exp(-2 k t) Id``."""
    grid = setup.grid
    params = ModelParams(nu=setup.nu, k=k, rho_k=0.0, alpha=setup.alpha, p=setup.p, T=T, steps=steps)
    config = SolverConfig(ball_radius=4 * max(c, 1.0) * (1 + grid.L**2), tolerance=1e-12)
    state, trace = picard_solve(grid, np.zeros((grid.d,) + grid.shape), constant_tensor(grid, c), params, config)
    exact = c * np.exp(-2 * k * params.times).reshape((-1, 1, 1) + (1,) * grid.d) * np.eye(grid.d).reshape(
        (1, grid.d, grid.d) + (1,) * grid.d)
    err = float(np.abs(state.tau - exact).max())
    ratios = trace.ratios
    return [
        BoundAudit("solver.relaxation_oracle", err, 1e-6, sweep={"k": k, "T": T, "steps": steps}),
        BoundAudit("solver.picard_ratio", max(ratios) if ratios else 0.0, 0.5,
                   details={"distances": trace.distance, "ratios": ratios}),
    ]


def lipschitz_suite(setup, T=0.125, steps=8, scales=(1.0, 0.1, 0.01), amplitude=0.5, k=0.5, rho_k=0.5):
    grid = setup.grid
    rng = setup.rng(6)
    u0, sigma0 = default_data(grid, amplitude=amplitude)
    params = ModelParams(nu=setup.nu, k=k, rho_k=rho_k, alpha=setup.alpha, p=setup.p, T=T, steps=steps)
    config = SolverConfig(ball_radius=data_radius(grid, u0, sigma0, params), tolerance=1e-12)
    du = 0.2 * random_solenoidal(grid, rng)
    ds = 0.2 * random_symmetric(grid, rng)
    zero_u, zero_s = np.zeros_like(du), np.zeros_like(ds)
    a = lipschitz_probe(grid, (u0, du), (sigma0, zero_s), params, config, scales)
    a.sweep["perturbation"] = "u0"
    b = lipschitz_probe(grid, (u0, zero_u), (sigma0, ds), params, config, scales)
    b.sweep["perturbation"] = "sigma0"
    return [a, b]


def mhd_invariant(setup, T=0.25, step_counts=(8, 16, 32), amplitude=0.5, min_order=1.9, tol=1e-3):
    """Cauchy invariant ``B = (grad_a X)^T b0`` at each step count, and its observed order in ``dt``."""
    grid = setup.grid
    u0, b0 = default_data(grid, "mhd", amplitude)
    errors = []
    for steps in step_counts:
        params = ModelParams(nu=setup.nu, model="mhd", alpha=setup.alpha, p=setup.p, T=T, steps=steps)
        config = SolverConfig(ball_radius=data_radius(grid, u0, b0, params), tolerance=1e-12)
        state, _ = picard_solve(grid, u0, b0, params, config)
        errors.append(cauchy_invariant_error(state, b0))
    dts = [T / s for s in step_counts]
    order = fit_exponent(dts, errors) if min(errors) > 0 else float("inf")
    return [
        BoundAudit("mhd.cauchy_invariant", errors[-1], tol, sweep={"steps": list(step_counts)},
                   details={"errors": errors}),
        BoundAudit("mhd.cauchy_order", min_order, max(order, 0.0), sweep={"dt": dts}, exponent_fit=order,
                   details={"errors": errors}),
    ]


def cauchy_invariant_error(state, b0):
    """``max_t ||B - (grad_a X)^T b0||_inf / ||b0||_inf`` with ``(grad_a X)[m, k] = d_{a_m} X_k``."""
    grid = state.grid
    eye = np.eye(grid.d).reshape((grid.d, grid.d) + (1,) * grid.d)
    worst = 0.0
    for disp, B in zip(state.flow.displacement, state.tau):
        F = eye + gradient(disp, grid)
        predicted = np.einsum("mk...,m...->k...", F, b0)
        worst = max(worst, float(np.abs(B - predicted).max()))
    return worst / float(np.abs(b0).max())


# -- counterexample ----------------------------------------------------------------------------

def counterexample_demo(alpha=0.5, speed=1.0, n=4096, d=2, L=2 * np.pi, powers=None, radius=None,
                        threshold=1.8, window=1):
    """Translated alpha-cone: the Hoelder seminorm of ``sigma(t) - sigma(0)`` stays near 2 while the sup norm vanishes.

    ``sigma(t) = tau o X(t)^{-1}`` with ``X(t)(a) = a + v t``, ``v = speed e_1``
    and ``|v| t = 2^k h`` for ``k`` in ``powers`` (decreasing ``t``); ``tau`` does not depend on time.
    ``powers`` defaults to shifts from ``n / 4`` cells down to one cell.
    """
    grid = Grid(d, n, L)
    if powers is None:
        powers = range(int(np.log2(n // 4)), -1, -1)
    powers = list(powers)
    if max(2**k for k in powers) >= n // 2:
        raise ConfigError(f"shifts of 2^k cells must stay below n/2 = {n // 2}; got powers {powers}")
    radius = 0.49 * L if radius is None else radius
    tau = alpha_cone(grid, alpha, radius)
    holder = HolderParams(alpha=alpha, pairs=0, window=window)
    velocity = np.zeros(d)
    velocity[0] = speed
    times, seminorms, sups = [], [], []
    for k in powers:
        t = (2**k) * grid.h / speed if speed else 2**k * grid.h
        disp = np.stack([np.zeros((d,) + grid.shape), velocity.reshape((d,) + (1,) * d) * t * np.ones((d,) + grid.shape)])
        flow = FlowMap(grid, disp, t, scheme="spline")
        diff = flow.compose(tau, 1, "inverse") - tau
        times.append(t)
        seminorms.append(holder_seminorm(diff, grid, holder))
        sups.append(linf_norm(diff, grid))
    tau_change = 0.0  # tau is time-independent, so tau(t) - tau(0) is the zero field
    lowest = min(seminorms)
    shrinking = all(b <= a for a, b in zip(sups[:-1], sups[1:]))
    if speed == 0:
        verdict = PASS if max(seminorms) == 0.0 and max(sups) == 0.0 else FAIL
    else:
        verdict = PASS if lowest >= threshold and tau_change == 0.0 and shrinking else FAIL
    return BoundAudit(
        "counterexample.holder_gap",
        threshold,
        lowest,
        sweep={"t": times, "shift_cells": [2**k for k in powers], "alpha": alpha, "speed": speed},
        details={"seminorms": seminorms, "sup_norms": sups, "tau_change": tau_change, "sup_shrinking": shrinking},
        verdict=verdict,
    )


# -- box robustness ----------------------------------------------------------------------------

def audited_norms(setup, T=0.25, steps=8):
    """Norms entering the default audits, computed on localized data centred in the box."""
    grid = setup.grid
    holder = HolderParams(alpha=setup.alpha, p=setup.p, pairs=0)
    out = {}
    for name, value in kernel_l1_norms(HeatKernelSpec(setup.nu, T, setup.d), box=12.0 * setup.L / (2 * np.pi)).values.items():
        out[f"kernel.{name}"] = value
    u0, sigma0 = default_data(grid)
    tpath = np.linspace(0.0, T, steps + 1).reshape((-1, 1, 1) + (1,) * grid.d)
    sig = remove_nyquist(sigma0[None] * (1 + tpath), grid)
    dt = T / steps
    out["u0.c1_alpha_p"] = field_norm(u0, grid, holder, "c1_alpha_p")
    out["sigma0.c_alpha_p"] = field_norm(sigma0, grid, holder, "c_alpha_p")
    out["U.c_alpha_p"] = field_norm(duhamel_U_values(sig, grid, setup.nu, dt)[-1], grid, holder, "c_alpha_p")
    out["G.c_alpha_p"] = field_norm(duhamel_G_values(sig, grid, setup.nu, dt)[-1], grid, holder, "c_alpha_p")
    out["Gamma.c_alpha_p"] = field_norm(gamma_values(sig, grid, setup.nu, dt)[-1], grid, holder, "c_alpha_p")
    eta = remove_nyquist(0.3 * gaussian_vortex(grid, 1.0, 0.7), grid)
    etas = np.broadcast_to(eta, (steps + 1,) + eta.shape)
    out["commutator_U.c_alpha_p"] = field_norm(commutator_U(etas, sig, setup.nu, steps, "direct", dt, grid),
                                               grid, holder, "c_alpha_p")
    params = ModelParams(nu=setup.nu, k=0.5, rho_k=0.5, alpha=setup.alpha, p=setup.p, T=T, steps=steps)
    config = SolverConfig(ball_radius=data_radius(grid, u0, sigma0, params), norm_pairs=0)
    state, _ = picard_solve(grid, u0, sigma0, params, config)
    disp = field_path_norms(state.flow.displacement, grid, T, holder, "c1_alpha")
    out["solution.x_lip_c1_alpha"] = disp.lip_norm
    out["solution.tau_sup_c_alpha_p"] = field_path_norms(state.tau, grid, T, holder).sup_norm
    out["solution.v_sup_c1_alpha_p"] = max(field_norm(v, grid, holder, "c1_alpha_p") for v in state.v)
    return out


def box_robustness(setup, tol=0.01, **kw):
    """Relative change of every audited norm when ``L`` and ``n`` double (same mesh width)."""
    small = audited_norms(setup, **kw)
    large = audited_norms(replace(setup, n=2 * setup.n, L=2 * setup.L), **kw)
    changes = {k: abs(large[k] - small[k]) / max(abs(small[k]), 1e-300) for k in small}
    worst = max(changes, key=changes.get)
    return [
        BoundAudit("box.robustness", changes[worst], tol, sweep={"L": [setup.L, 2 * setup.L]},
                   details={"worst": worst, "changes": changes, "small": small, "large": large})
    ]


SUITES = {
    "verify-kernels": kernel_suite,
    "verify-operators": operator_suite,
    "verify-flowmap": flowmap_suite,
    "verify-commutators": commutator_suite,
    "contraction": contraction_suite,
    "lipschitz": lipschitz_suite,
    "mhd-invariant": mhd_invariant,
}
