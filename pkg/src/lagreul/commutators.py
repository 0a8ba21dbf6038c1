"""Commutators of transport ``eta . grad`` with the Eulerian operators, in two independent forms.

The direct form differences the two compositions.  The decomposed form sums
the terms of the analytic splitting, each assembled separately so its norm can
be logged.  Inputs are projected off the Nyquist modes and every product is
dealiased, so the discrete product rule holds exactly and the two forms agree
to roundoff.
"""
import re

import numpy as np

from .audit import BoundAudit
from .errors import ConfigError
from .grid import fft, gradient, ifft, product, remove_nyquist
from .operators import (
    duhamel_G_values,
    duhamel_spectral,
    duhamel_U_path,
    duhamel_U_values,
    gamma_values,
    heat_semigroup,
    project_spectrum,
    riesz_symbol,
    PathField,
)
from .spaces import HolderParams, c1_norms, c_norms, field_path_norms, m_x

_RIESZ = re.compile(r"^riesz_(\d+)_(\d+)$")


# -- elementary pieces ----------------------------------------------------------

def advect(eta, f, grid, dealias=True):
    """``sum_i eta_i d_i f`` with a dealiased product."""
    return product("i...,i...->...", eta, gradient(f, grid), grid, dealias)


def divergence_vector(eta, grid):
    F = fft(eta, grid)
    return ifft(sum(1j * grid.xi_odd[i] * F[i] for i in range(grid.d)), grid)


def _inv_full_sq(grid):
    q = grid.xi_sq
    out = np.zeros_like(q)
    np.divide(1.0, q, out=out, where=q > 0)
    return out


def gradient_projector_spectrum(F, grid):
    """Symbol ``xi_k xi_m H_jl / |xi|^2`` taking a tensor ``[l, m]`` to ``[k, j]``; satisfies ``G = Q Gamma``."""
    spatial = (slice(None),) * grid.d
    contracted = np.stack(
        [sum(grid.xi_odd[m] * F[(Ellipsis, l, m) + spatial] for m in range(grid.d)) for l in range(grid.d)], axis=-grid.d - 1
    )
    projected = project_spectrum(contracted, grid, axis=contracted.ndim - grid.d - 1)
    inv = _inv_full_sq(grid)
    return np.stack([grid.xi_odd[k] * inv * projected for k in range(grid.d)], axis=-grid.d - 2)


def gradient_projector(f, grid):
    return ifft(gradient_projector_spectrum(fft(f, grid), grid), grid)


def apply_named_multiplier(name, f, grid):
    """Apply ``leray`` (first component index), ``riesz_i_j`` (componentwise) or ``gradient_projector``."""
    if name == "leray":
        return ifft(project_spectrum(fft(f, grid), grid, axis=0), grid)
    if name == "gradient_projector":
        return gradient_projector(f, grid)
    match = _RIESZ.match(name)
    if match:
        i, j = int(match.group(1)), int(match.group(2))
        if i >= grid.d or j >= grid.d:
            raise ConfigError(f"Riesz indices {i}, {j} out of range for d={grid.d}")
        return ifft(riesz_symbol(grid, i, j) * fft(f, grid), grid)
    raise ConfigError(f"unknown multiplier {name!r}; use 'leray', 'gradient_projector' or 'riesz_<i>_<j>'")


def cz_commutator(eta, symbol, sigma, grid):
    """``[eta . grad, K] sigma = eta . grad (K sigma) - K(eta . grad sigma)``."""
    eta = remove_nyquist(eta, grid)
    sigma = remove_nyquist(sigma, grid)
    return advect(eta, apply_named_multiplier(symbol, sigma, grid), grid) - apply_named_multiplier(
        symbol, advect(eta, sigma, grid), grid
    )


def cz_audit(eta, symbol, sigma, grid, constant, params=HolderParams()):
    lhs = c_norms(cz_commutator(eta, symbol, sigma, grid), grid, params).c_alpha_p
    rhs = c1_norms(eta, grid, params).c1_alpha * c_norms(sigma, grid, params).c_alpha_p
    return BoundAudit("commutators.cz_lemma", lhs, constant * rhs, sweep={"symbol": symbol})


def _path_values(p):
    return p.values if isinstance(p, PathField) else np.asarray(p, dtype=float)


def _time_integral(values, grid, nu, dt):
    """Spectrum of ``int_0^{t_m} exp(-nu (t_m - s)|xi|^2) F(s) ds`` for samples ``0..m``."""
    return duhamel_spectral(fft(values, grid), grid, nu, dt)[-1]


def _leray_div(W, grid):
    """``H div`` of a tensor spectrum ``[l, k]``: vector ``[j]``."""
    spatial = (slice(None),) * grid.d
    div = np.stack([sum(1j * grid.xi_odd[k] * W[(l, k) + spatial] for k in range(grid.d)) for l in range(grid.d)])
    return project_spectrum(div, grid, axis=0)


def _leray_double_div(P, grid):
    """``H`` of ``sum_{i,k} d_i d_k P[i, l, k]`` for a third-order spectrum."""
    spatial = (slice(None),) * grid.d
    out = np.stack(
        [
            sum(-grid.xi_odd[i] * grid.xi_odd[k] * P[(i, l, k) + spatial] for i in range(grid.d) for k in range(grid.d))
            for l in range(grid.d)
        ]
    )
    return project_spectrum(out, grid, axis=0)


def _check_t_index(n_samples, t_index):
    if not 0 <= t_index < n_samples:
        raise IndexError(f"time index {t_index} out of range 0..{n_samples - 1}")


# -- [eta . grad, U] --------------------------------------------------------------

def commutator_U_direct_path(eta, sigma, nu, dt, grid):
    """``eta(t) . grad U(sigma)(t) - U(eta . grad sigma)(t)`` at every sample (inputs already filtered)."""
    U = duhamel_U_values(sigma, grid, nu, dt)
    forcing = np.stack([advect(eta[s], sigma[s], grid) for s in range(len(sigma))])
    U2 = duhamel_U_values(forcing, grid, nu, dt)
    first = np.stack([advect(eta[t], U[t], grid) for t in range(len(sigma))])
    return first - U2


def commutator_U(eta, sigma, nu, t_index, form="direct", dt=None, grid=None, return_terms=False):
    """``[eta . grad, U](sigma)`` at ``t_index`` for vector path ``eta`` and tensor path ``sigma``.

    ``decomposed`` sums: the Leray commutator acting on ``int g * div sigma``,
    the ``div eta`` term, the ``eta(s) - eta(t)`` term, and the convolution commutator.
    """
    grid = grid or sigma.grid
    dt = dt or sigma.dt
    eta_v = remove_nyquist(_path_values(eta), grid)
    sig_v = remove_nyquist(_path_values(sigma), grid)
    _check_t_index(len(sig_v), t_index)
    m = t_index
    eta_v, sig_v = eta_v[: m + 1], sig_v[: m + 1]
    if m == 0:
        zero = np.zeros((grid.d,) + grid.shape)
        return (zero, {}) if return_terms else zero
    if form == "direct":
        out = commutator_U_direct_path(eta_v, sig_v, nu, dt, grid)[m]
        return (out, {"direct": out}) if return_terms else out
    if form != "decomposed":
        raise ConfigError(f"form must be 'direct' or 'decomposed', got {form!r}")

    eta_t = eta_v[m]
    spatial = (slice(None),) * grid.d
    Wspec = _time_integral(sig_v, grid, nu, dt)
    W = ifft(
        np.stack([sum(1j * grid.xi_odd[k] * Wspec[(l, k) + spatial] for k in range(grid.d)) for l in range(grid.d)]),
        grid,
    )
    HW = ifft(project_spectrum(fft(W, grid), grid), grid)
    leray = lambda v: ifft(project_spectrum(fft(v, grid), grid), grid)

    t1 = advect(eta_t, HW, grid) - leray(advect(eta_t, W, grid))

    div_eta = np.stack([divergence_vector(e, grid) for e in eta_v])
    f2 = np.stack([product("...,lk...->lk...", div_eta[s], sig_v[s], grid) for s in range(m + 1)])
    t2 = ifft(_leray_div(_time_integral(f2, grid, nu, dt), grid), grid)

    f3 = np.stack([product("i...,lk...->ilk...", eta_v[s] - eta_t, sig_v[s], grid) for s in range(m + 1)])
    t3 = -ifft(_leray_double_div(_time_integral(f3, grid, nu, dt), grid), grid)

    f4 = np.stack([product("i...,lk...->ilk...", eta_t, sig_v[s], grid) for s in range(m + 1)])
    t4 = leray(advect(eta_t, W, grid)) - ifft(_leray_double_div(_time_integral(f4, grid, nu, dt), grid), grid)

    terms = {"cz": t1, "div_eta": t2, "eta_difference": t3, "convolution": t4}
    out = t1 + t2 + t3 + t4
    return (out, terms) if return_terms else out


def convolution_commutator_kernel_form(eta, sigma, grid, nu, lag, x, box=10.0, panels=12, order=8, lam_order=8):
    """Kernel representation of ``eta(x) . (grad grad g * sigma)(x) - (grad grad g * (eta sigma))(x)``.

    Evaluates ``int (grad grad g)(z) z . (int_0^1 grad eta(x - (1-l) z) dl) sigma(x - z) dz`` by
    tensor Gauss-Legendre cubature; ``eta`` vector, ``sigma`` tensor ``[j, k]``, result ``[k]``.
    """
    from .grid import sample
    from .kernels import HeatKernelSpec, _gl_panels

    spec = HeatKernelSpec(nu, lag, grid.d)
    half = box * spec.scale
    nodes, weights = _gl_panels(np.linspace(-half, half, panels + 1), order)
    mesh = np.meshgrid(*([nodes] * grid.d), indexing="ij")
    z = np.stack([m.ravel() for m in mesh], axis=-1)
    w = np.ones(len(z))
    wmesh = np.meshgrid(*([weights] * grid.d), indexing="ij")
    for wm in wmesh:
        w = w * wm.ravel()
    hess = spec.hessian(z)  # [P, i, j]
    lam, lam_w = np.polynomial.legendre.leggauss(lam_order)
    lam, lam_w = 0.5 * (lam + 1), 0.5 * lam_w
    grad_eta = gradient(eta, grid)  # [m, i]
    avg = np.zeros((len(z), grid.d, grid.d))
    x = np.asarray(x, dtype=float)
    for l, wl in zip(lam, lam_w):
        pts = (x[None, :] - (1 - l) * z).T
        avg += wl * np.moveaxis(sample(grad_eta, pts, grid, "trig"), -1, 0)
    sig = np.moveaxis(sample(sigma, (x[None, :] - z).T, grid, "trig"), -1, 0)  # [P, j, k]
    # sum_{i,j,m} d_i d_j g(z) z_m avg[m, i] sigma[j, k]
    zm_avg = np.einsum("pm,pmi->pi", z, avg)
    return np.einsum("p,pij,pi,pjk->k", w, hess, zm_avg, sig)


# -- [eta . grad, G] --------------------------------------------------------------

def _eulerian_stress(tau, flow, upto, scheme):
    values = _path_values(tau)
    return np.stack([flow.compose(values[s], s, "inverse", scheme) for s in range(upto + 1)])


def commutator_G(eta, tau, flow, nu, t_index, form="direct", scheme="trig", return_terms=False):
    """``[eta . grad, G](tau o X^{-1})`` at ``t_index``.

    ``decomposed`` is ``[eta(t) . grad, Q] Gamma sigma + Q (I_1 + ... + I_6)`` with
    ``Q`` the symbol taking ``Gamma`` to ``G``; the time differences inside
    ``I_2`` and ``I_5`` are split into the two pieces of :meth:`FlowMap.delta_split`.
    """
    grid, dt = flow.grid, flow.dt
    m = t_index
    _check_t_index(flow.steps + 1, m)
    eta_v = remove_nyquist(_path_values(eta)[: m + 1], grid)
    sig_raw = _eulerian_stress(tau, flow, m, scheme)
    sig_v = remove_nyquist(sig_raw, grid)
    shape = (grid.d, grid.d) + grid.shape
    if m == 0:
        zero = np.zeros(shape)
        return (zero, {}) if return_terms else zero
    T = dt * m
    if form == "direct":
        G = duhamel_G_values(sig_v, grid, nu, dt)[m]
        forcing = np.stack([advect(eta_v[s], sig_v[s], grid) for s in range(m + 1)])
        out = advect(eta_v[m], G, grid) - duhamel_G_values(forcing, grid, nu, dt)[m]
        return (out, {"direct": out}) if return_terms else out
    if form != "decomposed":
        raise ConfigError(f"form must be 'direct' or 'decomposed', got {form!r}")

    eta_t, sig_t = eta_v[m], sig_v[m]
    lap = -grid.xi_sq

    def lap_int(values):
        return lap * _time_integral(values, grid, nu, dt)

    def grad_lap_int(values):
        """``int d_i Lap g * values[s] ds`` with the derivative index leading."""
        S = lap_int(values)
        return np.stack([1j * grid.xi_odd[i] * S for i in range(grid.d)])

    def transport_minus(eta_fixed, values):
        """``eta_i . int d_i Lap g * v ds - int d_i Lap g * (eta_i v) ds``."""
        A = ifft(grad_lap_int(values), grid)
        first = product("i...,i...->...", eta_fixed, A, grid)
        prod = np.stack([product("i...,lk...->ilk...", eta_fixed, v, grid) for v in values])
        S = lap_int(prod)
        second = ifft(sum(1j * grid.xi_odd[i] * S[i] for i in range(grid.d)), grid)
        return first - second

    constant_sig = np.broadcast_to(sig_t, (m + 1,) + sig_t.shape)
    gamma_sig = gamma_values(sig_v, grid, nu, dt)[m]
    cz = advect(eta_t, gradient_projector(gamma_sig, grid), grid) - gradient_projector(
        advect(eta_t, gamma_sig, grid), grid
    )

    d1, d2 = [], []
    for s in range(m + 1):
        if s < m:
            a, b = flow.delta_split(tau, s, m, scheme)
            d1.append(remove_nyquist(a, grid))
            d2.append(remove_nyquist(b, grid))
        else:
            d1.append(np.zeros(shape))
            d2.append(np.zeros(shape))
    d1, d2 = np.stack(d1), np.stack(d2)

    div_eta = np.stack([divergence_vector(e, grid) for e in eta_v])
    div_t = div_eta[m]

    I1 = transport_minus(eta_t, constant_sig)
    I2a = transport_minus(eta_t, d1)
    I2b = transport_minus(eta_t, d2)
    f3 = np.stack([product("i...,lk...->ilk...", eta_v[s] - eta_t, sig_v[s], grid) for s in range(m + 1)])
    S3 = lap_int(f3)
    I3 = -ifft(sum(1j * grid.xi_odd[i] * S3[i] for i in range(grid.d)), grid)
    f4 = np.stack([product("...,lk...->lk...", div_eta[s] - div_t, sig_v[s], grid) for s in range(m + 1)])
    I4 = ifft(lap_int(f4), grid)
    f5a = np.stack([product("...,lk...->lk...", div_t, v, grid) for v in d1])
    f5b = np.stack([product("...,lk...->lk...", div_t, v, grid) for v in d2])
    I5a = ifft(lap_int(f5a), grid)
    I5b = ifft(lap_int(f5b), grid)
    h = product("...,lk...->lk...", div_t, sig_t, grid)
    I6 = -(h - heat_semigroup(h, grid, nu, T)) / nu

    inner = {"I1": I1, "I2_delta1": I2a, "I2_delta2": I2b, "I3": I3, "I4": I4, "I5_delta1": I5a, "I5_delta2": I5b, "I6": I6}
    total_inner = sum(inner.values())
    out = cz + gradient_projector(total_inner, grid)
    terms = {"cz": cz, **{k: gradient_projector(v, grid) for k, v in inner.items()}}
    return (out, terms) if return_terms else out


def term_norms(terms, grid, params=HolderParams()):
    """Per-term ``L^inf`` and ``C^{alpha,p}`` norms for logging."""
    return {
        name: {"linf": float(np.abs(v).max()), "c_alpha_p": c_norms(v, grid, params).c_alpha_p}
        for name, v in terms.items()
    }


# -- variation identity ------------------------------------------------------------

def _lagrangian_velocity(flow_disp, tau_values, grid, T, nu, scheme):
    from .flowmap import FlowMap

    flow = FlowMap(grid, flow_disp, T, scheme=scheme, check=False)
    sigma = flow.compose_path(tau_values, "inverse")
    U = duhamel_U_path(PathField(grid, sigma, T), nu)
    return flow.compose_path(U, "forward"), flow, sigma


def variation_residual(x1, x2, tau1, tau2, grid, T, nu, eps, step, tau_map=None, scheme="trig"):
    """Sup-norm gap between the central difference in ``eps`` and the commutator formula.

    Along ``X_e = X1 + e (X2 - X1)``, ``tau_e = tau_map(tau1 + e (tau2 - tau1))``
    the formula reads ``(dF/de) o X_e^{-1} = [eta_e . grad, U](sigma_e) + U(delta_e)``
    with ``F(e) = U(tau_e o X_e^{-1}) o X_e``.  ``tau_map`` (with its derivative
    supplied as ``tau_map.derivative``) covers the ``v (x) v`` analogue.
    Returns ``(residual, reference)`` where reference is the formula's sup norm.
    """
    xp = x2 - x1
    tp = tau2 - tau1
    ident = (lambda t: t) if tau_map is None else tau_map

    def state(e):
        return x1 + e * xp, ident(tau1 + e * tp)

    fp = _lagrangian_velocity(*state(eps + step), grid, T, nu, scheme)[0]
    fm = _lagrangian_velocity(*state(eps - step), grid, T, nu, scheme)[0]
    dF = (fp - fm) / (2 * step)

    disp, tau_e = state(eps)
    _, flow, sigma = _lagrangian_velocity(disp, tau_e, grid, T, nu, scheme)
    lhs = flow.compose_path(dF, "inverse")
    eta = flow.compose_path(xp, "inverse")
    if tau_map is None:
        tau_dot = np.broadcast_to(tp, tau_e.shape)
    else:
        tau_dot = tau_map.derivative(tau1 + eps * tp, tp)
    delta = flow.compose_path(tau_dot, "inverse")
    comm = commutator_U_direct_path(eta, sigma, nu, T / (len(sigma) - 1), grid)
    rhs = comm + duhamel_U_path(PathField(grid, delta, T), nu)
    return float(np.abs(lhs - rhs).max()), float(np.abs(rhs).max())


class OuterSquare:
    """``v -> v (x) v`` on a vector path, for the quadratic variation identity."""

    def __call__(self, v):
        return np.einsum("ti...,tj...->tij...", v, v)

    def derivative(self, v, dv):
        return np.einsum("ti...,tj...->tij...", dv, v) + np.einsum("ti...,tj...->tij...", v, dv)


def variation_identity_check(x1, x2, tau1, tau2, grid, T, nu, eps=0.5, steps=(0.2, 0.1, 0.05, 0.025),
                             tau_map=None, scheme="trig", min_order=1.9, grid2=None):
    """Observed convergence order of the variation identity under step halving."""
    from .audit import fit_exponent

    if grid2 is not None and grid2 != grid:
        raise ConfigError("the two states live on different grids")
    residuals, refs = [], []
    for h in steps:
        r, ref = variation_residual(x1, x2, tau1, tau2, grid, T, nu, eps, h, tau_map, scheme)
        residuals.append(r)
        refs.append(ref)
    scale = max(refs) if refs else 0.0
    if scale == 0.0 or max(residuals) == 0.0:
        return BoundAudit("commutators.variation_identity", 0.0, 0.0,
                          details={"residuals": residuals, "steps": list(steps)})
    orders = [float(np.log2(a / b)) for a, b in zip(residuals[:-1], residuals[1:]) if a > 0 and b > 0]
    order = fit_exponent(steps, residuals) if min(residuals) > 0 else float("inf")
    return BoundAudit(
        "commutators.variation_identity",
        min_order,
        order,
        sweep={"steps": list(steps), "eps": eps},
        exponent_fit=order,
        details={"residuals": residuals, "reference": scale, "pairwise_orders": orders},
    )


# -- bound audits --------------------------------------------------------------------

def commutator_U_audit(eta, sigma, x_prime, flow, nu, constant, params=HolderParams()):
    """``||[eta.grad, U] sigma||_{L^inf C^{alpha,p}}`` against the theorem's right side."""
    grid, T = flow.grid, flow.T
    eta_v = remove_nyquist(_path_values(eta), grid)
    sig_v = remove_nyquist(_path_values(sigma), grid)
    comm = commutator_U_direct_path(eta_v, sig_v, nu, flow.dt, grid)
    lhs = field_path_norms(comm, grid, T, params).sup_norm
    x_lip = field_path_norms(flow.displacement, grid, T, params, "c1_alpha").lip_norm
    xp_lip = field_path_norms(_path_values(x_prime), grid, T, params, "c1_alpha").lip_norm
    sig_sup = field_path_norms(_path_values(sigma), grid, T, params).sup_norm
    mx = m_x(flow, grid, params)
    rhs = (np.sqrt(T / nu) + T / nu * x_lip) * mx ** (1 + 3 * params.alpha) * xp_lip * sig_sup
    return BoundAudit("commutators.theorem_commU", lhs, constant * rhs, sweep={"T": T, "nu": nu},
                      details={"x_minus_id_lip": x_lip, "x_prime_lip": xp_lip, "sigma_sup": sig_sup, "m_x": mx})


def commutator_G_audit(eta, tau, x_prime, flow, nu, constant, params=HolderParams(), scheme="spline"):
    """Ratio of ``||[eta.grad, G](tau o X^{-1})||`` to ``(||X'||_inf + ||X'||_Lip T^{1/2}) R``.

    The polynomial ``R`` is not specified; the audit uses
    ``R = (1 + ||tau||_Lip) (1 + ||X - Id||_Lip)^4`` and checks boundedness of the ratio.
    """
    grid, T = flow.grid, flow.T
    lhs = 0.0
    for t in range(1, flow.steps + 1):
        val = commutator_G(eta, tau, flow, nu, t, "direct", scheme)
        lhs = max(lhs, c_norms(val, grid, params).c_alpha_p)
    xp = field_path_norms(_path_values(x_prime), grid, T, params, "c1_alpha")
    x_lip = field_path_norms(flow.displacement, grid, T, params, "c1_alpha").lip_norm
    tau_lip = field_path_norms(_path_values(tau), grid, T, params).lip_norm
    poly = (1 + tau_lip) * (1 + x_lip) ** 4
    rhs = (xp.sup_norm + xp.lip_norm * np.sqrt(T)) * poly
    return BoundAudit("commutators.theorem_commG", lhs, constant * rhs, sweep={"T": T, "nu": nu},
                      details={"polynomial": poly, "x_minus_id_lip": x_lip, "tau_lip": tau_lip})
