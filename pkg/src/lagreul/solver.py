"""Lagrangian fixed-point solver: nonlinearities, solution map, Picard iteration and probes.

State paths are sampled at ``t_j = j T / steps``.  The gradient convention is
``g[k, j] = (d_k u_j) o X`` throughout, so the chain rule reads
``grad_a V = (grad_a X) g`` and magnetic stretching reads ``dB/dt = g^T B``.
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .audit import BoundAudit, FAIL, PASS
from .errors import ConfigError, ConvergenceError, SolverStateError
from .data import smooth_random
from .flowmap import FlowMap
from .grid import gradient, product
from .operators import duhamel_G_values, duhamel_U_values, heat_semigroup_path
from .spaces import HolderParams, field_norm, field_path_norms

MODELS = ("oldroyd_b", "mhd")
SYMMETRY_TOL = 1e-12
VELOCITY_TOL = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Physical constants, regularity indices and the time discretisation."""

    nu: float = 1.0
    k: float = 0.0
    rho_k: float = 0.0
    model: str = "oldroyd_b"
    alpha: float = 0.5
    p: float = 2.0
    T: float = 0.5
    steps: int = 32

    def __post_init__(self):
        if not self.nu > 0:
            raise ConfigError(f"viscosity must be positive, got {self.nu}")
        if self.k < 0 or self.rho_k < 0:
            raise ConfigError("relaxation rate and coupling must be nonnegative")
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 1 < self.p < np.inf:
            raise ConfigError(f"p must lie in (1, inf), got {self.p}")
        if not self.T > 0:
            raise ConfigError(f"horizon must be positive, got {self.T}")
        if self.steps < 2:
            raise ConfigError(f"need at least 2 time steps, got {self.steps}")

    @property
    def dt(self):
        return self.T / self.steps

    @property
    def times(self):
        return np.linspace(0.0, self.T, self.steps + 1)

    def with_horizon(self, T):
        return replace(self, T=float(T))


@dataclass(frozen=True)
class SolverConfig:
    """Picard controls.  ``couple_velocity=False`` drops the Duhamel terms (a test hook)."""

    ball_radius: float = 10.0
    max_iterations: int = 40
    tolerance: float = 1e-9
    dealias: bool = True
    scheme: str = "spline"
    couple_velocity: bool = True
    norm_pairs: int | None = None
    norm_seed: int = 0

    def __post_init__(self):
        if not self.ball_radius > 0:
            raise ConfigError(f"ball radius must be positive, got {self.ball_radius}")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ConfigError("need at least one Picard iteration")
        if self.scheme not in ("spline", "trig"):
            raise ConfigError(f"unknown interpolation scheme {self.scheme!r}")

    def holder(self, params):
        return HolderParams(alpha=params.alpha, p=params.p, pairs=self.norm_pairs, seed=self.norm_seed)


class PathState:
    """A path triple ``(X, tau, v)``; ``tau`` is a symmetric tensor (Oldroyd-B) or a vector ``B`` (MHD)."""

    def __init__(self, flow, tau, v):
        self.flow = flow
        self.tau = np.asarray(tau, dtype=float)
        self.v = np.asarray(v, dtype=float)
        grid = flow.grid
        n = flow.steps + 1
        if self.v.shape != (n, grid.d) + grid.shape:
            raise ConfigError(f"velocity path has shape {self.v.shape}, expected {(n, grid.d) + grid.shape}")
        if self.tau.shape[0] != n or self.tau.shape[-grid.d:] != grid.shape:
            raise ConfigError(f"stress path has shape {self.tau.shape}, which does not match the flow map")
        if self.tau.ndim not in (grid.d + 2, grid.d + 3):
            raise ConfigError("stress samples must be vectors or rank-2 tensors")
        if not (np.all(np.isfinite(self.tau)) and np.all(np.isfinite(self.v))):
            raise SolverStateError("path state contains non-finite values")

    @classmethod
    def from_velocity(cls, grid, v, tau, T, scheme="spline", check=True):
        """State with ``X = Id + int_0^t v`` (trapezoid), so ``v = dX/dt`` holds by construction."""
        v = np.asarray(v, dtype=float)
        disp = cumulative_trapezoid(v, dx=T / (v.shape[0] - 1), axis=0, initial=0.0)
        return cls(FlowMap(grid, disp, T, scheme=scheme, check=check), tau, v)

    @property
    def grid(self):
        return self.flow.grid

    @property
    def T(self):
        return self.flow.T

    @property
    def steps(self):
        return self.flow.steps

    @property
    def is_tensor(self):
        return self.tau.ndim == self.grid.d + 3

    def velocity_mismatch(self):
        """``max |(X_{j+1} - X_j)/dt - (v_j + v_{j+1})/2|``, the discrete form of ``v = dX/dt``."""
        rate = np.diff(self.flow.displacement, axis=0) / self.flow.dt
        mean = 0.5 * (self.v[1:] + self.v[:-1])
        return float(np.abs(rate - mean).max())

    def symmetry_defect(self):
        if not self.is_tensor:
            return 0.0
        return float(np.abs(self.tau - np.swapaxes(self.tau, 1, 2)).max())

    def check(self):
        """Raise :class:`SolverStateError` if ``v = dX/dt`` or stress symmetry fails."""
        scale = max(1.0, float(np.abs(self.v).max()))
        if self.velocity_mismatch() > VELOCITY_TOL * scale:
            raise SolverStateError(f"v differs from dX/dt by {self.velocity_mismatch():.3e}")
        if self.symmetry_defect() > SYMMETRY_TOL * max(1.0, float(np.abs(self.tau).max())):
            raise SolverStateError(f"stress asymmetric by {self.symmetry_defect():.3e}")
        return self


@dataclass
class IterationTrace:
    """Per-iteration increments in the three path norms and their sum."""

    dx: list = field(default_factory=list)
    dtau: list = field(default_factory=list)
    dv: list = field(default_factory=list)
    distance: list = field(default_factory=list)
    converged: bool = False

    def record(self, parts):
        self.dx.append(parts[0])
        self.dtau.append(parts[1])
        self.dv.append(parts[2])
        self.distance.append(sum(parts))

    @property
    def iterations(self):
        return len(self.distance)

    @property
    def ratios(self):
        """Successive distance ratios, skipping steps whose previous distance is zero."""
        return [b / a for a, b in zip(self.distance[:-1], self.distance[1:]) if a > 0]

    def rows(self):
        ratios = [None] + [b / a if a > 0 else None for a, b in zip(self.distance[:-1], self.distance[1:])]
        return [
            {"iteration": i + 1, "dx": self.dx[i], "dtau": self.dtau[i], "dv": self.dv[i],
             "distance": self.distance[i], "ratio": ratios[i]}
            for i in range(self.iterations)
        ]


# -- path-space norms ----------------------------------------------------------------

def p1_parts(state, holder, other=None):
    """``(||X - Id||_{Lip C^{1+a,p}}, ||tau||_{Lip C^{a,p}}, ||v||_{L^inf C^{1+a,p}})``.

    With ``other`` given, the norms of the differences ``state - other``.
    """
    grid, T = state.grid, state.T
    disp, tau, v = state.flow.displacement, state.tau, state.v
    if other is not None:
        disp = disp - other.flow.displacement
        tau = tau - other.tau
        v = v - other.v
    x_part = field_path_norms(disp, grid, T, holder, "c1_alpha_p").lip_norm
    tau_part = field_path_norms(tau, grid, T, holder, "c_alpha_p").lip_norm
    v_part = max(field_norm(s, grid, holder, "c1_alpha_p") for s in v)
    return x_part, tau_part, v_part


def p1_norm(state, holder):
    return float(sum(p1_parts(state, holder)))


def p1_distance(a, b, holder):
    return float(sum(p1_parts(a, holder, b)))


# -- nonlinearities ---------------------------------------------------------------------

def _check_data(u0, sigma0, grid, params):
    u0 = np.asarray(u0, dtype=float)
    sigma0 = np.asarray(sigma0, dtype=float)
    if u0.shape != (grid.d,) + grid.shape:
        raise ConfigError(f"initial velocity has shape {u0.shape}, expected {(grid.d,) + grid.shape}")
    want = (grid.d, grid.d) if params.model == "oldroyd_b" else (grid.d,)
    if sigma0.shape != want + grid.shape:
        raise ConfigError(f"{params.model} initial stress must have component shape {want}, got {sigma0.shape}")
    return u0, sigma0


def _eulerian_forcing(state, config, params):
    """Eulerian velocity ``u = v o X^{-1}`` and the forcing stress (``tau`` or ``b (x) b``) at every sample."""
    flow, grid = state.flow, state.grid
    u = flow.compose_path(state.v, "inverse", config.scheme)
    stress = flow.compose_path(state.tau, "inverse", config.scheme)
    if params.model == "mhd":
        stress = product("ti...,tj...->tij...", stress, stress, grid, config.dealias)
    uu = product("ti...,tj...->tij...", u, u, grid, config.dealias)
    return u, stress, uu


def lagrangian_fields(state, u0, params, config=SolverConfig(), return_terms=False):
    """Lagrangian velocity ``V`` and gradient ``g`` paths for one state.

    ``V = L(u0) o X + U(stress - u (x) u) o X`` and
    ``g = L(grad u0) o X + G(stress) o X - G(u (x) u) o X``.  With
    ``return_terms`` the separate composed pieces are returned as well.
    """
    grid = state.grid
    if state.flow.grad_max and max(state.flow.grad_max) >= 0.5:
        raise SolverStateError("flow map displacement gradient violates the ball limit")
    times = np.linspace(0.0, state.T, state.steps + 1)
    heat = heat_semigroup_path(u0, grid, params.nu, times)
    heat_grad = heat_semigroup_path(gradient(u0, grid), grid, params.nu, times)
    eul_v = {"heat": heat}
    eul_g = {"heat": heat_grad}
    if config.couple_velocity:
        _, stress, uu = _eulerian_forcing(state, config, params)
        dt = state.flow.dt
        eul_v["stress"] = duhamel_U_values(stress, grid, params.nu, dt)
        eul_v["convection"] = -duhamel_U_values(uu, grid, params.nu, dt)
        eul_g["stress"] = duhamel_G_values(stress, grid, params.nu, dt)
        eul_g["convection"] = -duhamel_G_values(uu, grid, params.nu, dt)
    compose = lambda values: state.flow.compose_path(values, "forward", config.scheme)
    if return_terms:
        v_terms = {name: compose(val) for name, val in eul_v.items()}
        g_terms = {name: compose(val) for name, val in eul_g.items()}
        return sum(v_terms.values()), sum(g_terms.values()), v_terms, g_terms
    return compose(sum(eul_v.values())), compose(sum(eul_g.values()))


def lagrangian_g(state, u0, params, config=SolverConfig(), t_index=None):
    """``g[k, j] = (d_k u_j) o X`` along the state (one sample if ``t_index`` is given)."""
    g = lagrangian_fields(state, u0, params, config)[1]
    return g if t_index is None else g[t_index]


def nonlinearity_V(state, u0, params, config=SolverConfig(), t_index=None):
    """Lagrangian velocity ``V`` along the state (one sample if ``t_index`` is given)."""
    v = lagrangian_fields(state, u0, params, config)[0]
    return v if t_index is None else v[t_index]


def stress_rate(tau, g, params):
    """Pointwise right side of the stress ODE for one sample.

    Oldroyd-B: ``g tau + tau g^T - 2 k tau + 2 rho_k (g + g^T)``.  MHD: ``g^T B``.
    """
    tau = np.asarray(tau, dtype=float)
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    if g.shape[:2] != (d, d):
        raise ConfigError(f"gradient must be a rank-2 tensor, got shape {g.shape}")
    if params.model == "oldroyd_b":
        if tau.shape != g.shape:
            raise ConfigError(f"Oldroyd-B stress shape {tau.shape} does not match gradient {g.shape}")
        gt = np.swapaxes(g, 0, 1)
        stretch = np.einsum("ik...,kj...->ij...", g, tau) + np.einsum("ik...,kj...->ij...", tau, gt)
        return stretch - 2 * params.k * tau + 2 * params.rho_k * (g + gt)
    if tau.shape != g.shape[1:]:
        raise ConfigError(f"MHD field shape {tau.shape} does not match gradient {g.shape}")
    return np.einsum("ki...,k...->i...", g, tau)


def nonlinearity_T(state, g, params, t_index=None):
    """Stress rate along a state for a gradient path ``g`` (one sample if ``t_index`` is given)."""
    if t_index is not None:
        return stress_rate(state.tau[t_index], g[t_index], params)
    return np.stack([stress_rate(s, gs, params) for s, gs in zip(state.tau, g)])


def integrate_path(rate, initial, T):
    """``initial + int_0^{t_j} rate`` by the cumulative trapezoid rule."""
    rate = np.asarray(rate, dtype=float)
    return initial + cumulative_trapezoid(rate, dx=T / (rate.shape[0] - 1), axis=0, initial=0.0)


# -- solution map and Picard iteration ------------------------------------------------------

def fixed_point_map(state, u0, sigma0, params, config=SolverConfig()):
    """One application of the solution map: ``(X, tau, v) -> (Id + int V, sigma0 + int T, V)``."""
    u0, sigma0 = _check_data(u0, sigma0, state.grid, params)
    v_new, g = lagrangian_fields(state, u0, params, config)
    tau_new = integrate_path(nonlinearity_T(state, g, params), sigma0, state.T)
    return PathState.from_velocity(state.grid, v_new, tau_new, state.T, config.scheme)


def initial_state(grid, u0, sigma0, params, config=SolverConfig()):
    """Picard start: heat-flow velocity, the flow it generates, and a constant stress path."""
    u0, sigma0 = _check_data(u0, sigma0, grid, params)
    v = heat_semigroup_path(u0, grid, params.nu, params.times)
    tau = np.broadcast_to(sigma0, (params.steps + 1,) + sigma0.shape).copy()
    return PathState.from_velocity(grid, v, tau, params.T, config.scheme)


def picard_solve(grid, u0, sigma0, params, config=SolverConfig(), start=None):
    """Iterate the solution map until the path distance drops below the tolerance.

    Converged only if every observed distance ratio is below one; otherwise,
    or when the iteration budget runs out, :class:`ConvergenceError` carries
    the trace.
    """
    holder = config.holder(params)
    state = initial_state(grid, u0, sigma0, params, config) if start is None else start
    trace = IterationTrace()
    for _ in range(config.max_iterations):
        new = fixed_point_map(state, u0, sigma0, params, config)
        trace.record(p1_parts(new, holder, state))
        state = new
        if trace.distance[-1] < config.tolerance:
            if any(r >= 1.0 for r in trace.ratios):
                raise ConvergenceError("Picard distances did not decrease monotonically", trace)
            trace.converged = True
            return state.check(), trace
    raise ConvergenceError(
        f"no convergence in {config.max_iterations} iterations (last distance {trace.distance[-1]:.3e})", trace
    )


# -- random ball states and probes ----------------------------------------------------------

def random_ball_state(grid, u0, sigma0, params, config, rng, fraction=0.5):
    """A random state with ``X(0) = Id``, ``tau(0) = sigma0`` and ``v(0) = u0`` inside the ball.

    The target norm lies the given ``fraction`` of the way from the heat-flow
    state's norm to the ball radius.  The perturbation is quadratic in time and spatially smooth; its amplitude is
    shrunk until both the norm target and the displacement-gradient limit hold.
    """
    u0, sigma0 = _check_data(u0, sigma0, grid, params)
    holder = config.holder(params)
    t = params.times.reshape((-1,) + (1,) * (grid.d + 1))
    tt = t.reshape((-1,) + (1,) * (sigma0.ndim))
    base_v = heat_semigroup_path(u0, grid, params.nu, params.times)
    dv = t * smooth_random(grid, (grid.d,), rng) + t**2 * smooth_random(grid, (grid.d,), rng)
    dtau = tt * smooth_random(grid, sigma0.shape[:-grid.d], rng) + tt**2 * smooth_random(
        grid, sigma0.shape[:-grid.d], rng
    )
    if sigma0.ndim == grid.d + 2:
        dtau = 0.5 * (dtau + np.swapaxes(dtau, 1, 2))
    base_norm = p1_norm(PathState.from_velocity(grid, base_v, np.broadcast_to(sigma0, dtau.shape), params.T, config.scheme), holder)
    if base_norm > config.ball_radius:
        raise SolverStateError(f"the unperturbed state has norm {base_norm:.3g} > ball radius {config.ball_radius:.3g}")
    target = base_norm + fraction * (config.ball_radius - base_norm)
    amp = 1.0 / params.T
    for _ in range(60):
        try:
            state = PathState.from_velocity(grid, base_v + amp * dv, sigma0 + amp * dtau, params.T, config.scheme)
        except SolverStateError:
            amp *= 0.5
            continue
        norm = p1_norm(state, holder)
        if norm <= target:
            return state
        amp *= 0.9 * target / norm if norm > 0 else 0.5
    raise SolverStateError("could not place a random state inside the ball")


def solution_map_in_ball(state, u0, sigma0, params, config):
    """``(inside, norm)`` for the image of ``state``; a map leaving the displacement limit counts as outside."""
    try:
        image = fixed_point_map(state, u0, sigma0, params, config)
    except SolverStateError:
        return False, float("inf")
    norm = p1_norm(image, config.holder(params))
    return norm <= config.ball_radius, norm


def contraction_ratios(grid, u0, sigma0, params, config, trials, seed, pair=None):
    """``||S P2 - S P1|| / ||P2 - P1||`` over random pairs in the ball (zero denominators skipped)."""
    holder = config.holder(params)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(trials):
        if pair is None:
            p1 = random_ball_state(grid, u0, sigma0, params, config, rng, rng.uniform(0.2, 0.6))
            p2 = random_ball_state(grid, u0, sigma0, params, config, rng, rng.uniform(0.2, 0.6))
        else:
            p1, p2 = pair(rng)
        denom = p1_distance(p2, p1, holder)
        if denom == 0.0:
            continue
        s1 = fixed_point_map(p1, u0, sigma0, params, config)
        s2 = fixed_point_map(p2, u0, sigma0, params, config)
        ratios.append(p1_distance(s2, s1, holder) / denom)
    return ratios


def contraction_probe(grid, u0, sigma0, params, config, trials=5, seed=0, halvings=1, limit=0.5):
    """Maximum contraction ratio at ``T`` against ``limit``; it must also shrink each time ``T`` halves."""
    sweep_T, sweep_max = [], []
    for h in range(halvings + 1):
        p = params.with_horizon(params.T / 2**h)
        ratios = contraction_ratios(grid, u0, sigma0, p, config, trials, seed)
        sweep_T.append(p.T)
        sweep_max.append(max(ratios) if ratios else 0.0)
    decreasing = all(b < a for a, b in zip(sweep_max[:-1], sweep_max[1:])) or max(sweep_max) == 0.0
    measured = sweep_max[0]
    verdict = PASS if measured <= limit and decreasing else FAIL
    exponent = None
    if len(sweep_T) > 1 and min(sweep_max) > 0:
        exponent = float(np.polyfit(np.log(sweep_T), np.log(sweep_max), 1)[0])
    return BoundAudit(
        "solver.contraction",
        measured,
        limit,
        sweep={"T": sweep_T, "max_ratio": sweep_max},
        exponent_fit=exponent,
        details={"decreasing": decreasing, "ball_radius": config.ball_radius, "trials": trials},
        verdict=verdict,
    )


def data_radius(grid, u0, sigma0, params, holder=None):
    """Ball radius ``4 max(||u0||_{1+a,p}, ||sigma0||_{a,p}, 1)``."""
    holder = holder or HolderParams(alpha=params.alpha, p=params.p)
    return 4.0 * max(field_norm(u0, grid, holder, "c1_alpha_p"), field_norm(sigma0, grid, holder, "c_alpha_p"), 1.0)


@dataclass
class Selection:
    ball_radius: float
    T: float
    history: list


def select_radius_and_horizon(grid, u0, sigma0, params, config, states=10, probe_trials=3, seed=0,
                              start_T=1.0, max_halvings=10, probe_limit=0.45):
    """Search for ``(Gamma, T)``: halve ``T`` from ``start_T`` until random ball states map into the ball
    and the contraction probe stays below ``probe_limit``.
    """
    radius = data_radius(grid, u0, sigma0, params, config.holder(params))
    cfg = replace(config, ball_radius=radius)
    history = []
    T = start_T
    for _ in range(max_halvings + 1):
        p = params.with_horizon(T)
        rng = np.random.default_rng(seed)
        entry = {"T": T, "image_norms": [], "inside": True, "probe": None}
        for _ in range(states):
            try:
                state = random_ball_state(grid, u0, sigma0, p, cfg, rng, rng.uniform(0.2, 0.9))
            except SolverStateError:
                entry["inside"] = False
                break
            inside, norm = solution_map_in_ball(state, u0, sigma0, p, cfg)
            entry["image_norms"].append(norm)
            if not inside:
                entry["inside"] = False
                break
        if entry["inside"]:
            ratios = contraction_ratios(grid, u0, sigma0, p, cfg, probe_trials, seed + 1)
            entry["probe"] = max(ratios) if ratios else 0.0
        history.append(entry)
        if entry["inside"] and entry["probe"] <= probe_limit:
            return Selection(radius, T, history)
        T /= 2
    raise ConvergenceError(f"no admissible horizon after {max_halvings} halvings", history)


def lipschitz_probe(grid, u0_pair, sigma0_pair, params, config, scales=(1.0, 0.1, 0.01), stable_factor=2.0):
    """Solution distance over data distance as the data perturbation shrinks.

    ``u0_pair = (u0, du)`` and ``sigma0_pair = (sigma0, dsigma)``; each scale ``s``
    solves with ``(u0 + s du, sigma0 + s dsigma)``.  PASS if the ratios stay
    within ``stable_factor`` of each other.
    """
    u0, du = (np.asarray(a, dtype=float) for a in u0_pair)
    s0, ds = (np.asarray(a, dtype=float) for a in sigma0_pair)
    holder = config.holder(params)
    base, _ = picard_solve(grid, u0, s0, params, config)
    ratios, distances, data = [], [], []
    for s in scales:
        data_dist = s * (field_norm(du, grid, holder, "c1_alpha_p") + field_norm(ds, grid, holder, "c_alpha_p"))
        if data_dist == 0.0:
            ratios.append(0.0)
            distances.append(0.0)
            data.append(0.0)
            continue
        sol, _ = picard_solve(grid, u0 + s * du, s0 + s * ds, params, config)
        dist = p1_distance(sol, base, holder)
        distances.append(dist)
        data.append(data_dist)
        ratios.append(dist / data_dist)
    positive = [r for r in ratios if r > 0]
    spread = max(positive) / min(positive) if positive else 1.0
    return BoundAudit(
        "solver.lipschitz",
        spread,
        stable_factor,
        sweep={"scale": list(scales), "ratio": ratios},
        details={"solution_distance": distances, "data_distance": data},
    )


def velocity_growth_audit(grid, u0, sigma0, params, config, constant, horizons=(0.5, 0.25, 0.125), seed=0):
    """``sup_t ||V(t) - L(u0)(t)||_{C^{a,p}}`` against ``constant sqrt(T) (1 + Gamma)^2`` on random ball states.

    Since ``||L(u0)(t)||_{a,p} <= ||u0||_{a,p}``, this bounds the growth of
    ``||V||_{L^inf C^{a,p}}`` over the data norm.  The fitted ``T`` exponent
    of the deviation is reported alongside.
    """
    holder = config.holder(params)
    radius = config.ball_radius
    excess, bounds = [], []
    for T in horizons:
        p = params.with_horizon(T)
        rng = np.random.default_rng(seed)
        state = random_ball_state(grid, u0, sigma0, p, config, rng)
        V = nonlinearity_V(state, u0, p, config)
        heat = heat_semigroup_path(u0, grid, p.nu, p.times)
        excess.append(max(field_norm(a - b, grid, holder, "c_alpha_p") for a, b in zip(V, heat)))
        bounds.append(constant * np.sqrt(T) * (1 + radius) ** 2)
    ratios = [e / b for e, b in zip(excess, bounds)]
    worst = int(np.argmax(ratios))
    exponent = float(np.polyfit(np.log(horizons), np.log(excess), 1)[0]) if min(excess) > 0 else None
    return BoundAudit(
        "solver.velocity_growth",
        excess[worst],
        bounds[worst],
        sweep={"T": list(horizons), "excess": excess, "bound": bounds},
        exponent_fit=exponent,
        details={"u0_norm": field_norm(u0, grid, holder, "c_alpha_p"), "ball_radius": radius},
    )
