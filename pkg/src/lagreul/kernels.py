"""Heat kernel family in closed form, the profile S, the two-time kernel K, and L1 audits.

Points are arrays whose last axis has length ``d``.  Vector-valued kernels are
measured in ``L^1`` with the pointwise Euclidean norm.
"""
from dataclasses import dataclass
from math import gamma, pi

import numpy as np

from .audit import BoundAudit, fit_exponent
from .errors import DomainError

GL_ORDER = 16

# Predicted power of (nu t) for each kernel L1 norm.
PREDICTED_EXPONENTS = {
    "g": 0.0,
    "grad_g": -0.5,
    "laplacian_g": -1.0,
    "grad_laplacian_g": -1.5,
    "hessian_z": -0.5,
}


@dataclass(frozen=True)
class HeatKernelSpec:
    nu: float
    t: float
    d: int = 2

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError(f"viscosity must be positive, got {self.nu}")
        if not self.t > 0:
            raise DomainError(f"heat kernel time must be positive, got {self.t}")

    @property
    def width(self):
        """``4 nu t``; the Gaussian reads ``exp(-|x|^2 / width)``."""
        return 4.0 * self.nu * self.t

    @property
    def scale(self):
        return np.sqrt(self.nu * self.t)

    def _prep(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise ValueError(f"points need trailing axis {self.d}, got shape {x.shape}")
        r2 = (x**2).sum(axis=-1)
        return x, r2, self.gaussian_radial(r2)

    def gaussian_radial(self, r2):
        a = self.width
        return (pi * a) ** (-self.d / 2) * np.exp(-r2 / a)

    def value(self, x):
        return self._prep(x)[2]

    def grad(self, x):
        x, _, g = self._prep(x)
        return (-2.0 / self.width) * x * g[..., None]

    def hessian(self, x):
        x, _, g = self._prep(x)
        a = self.width
        outer = x[..., :, None] * x[..., None, :]
        return (4.0 / a**2 * outer - 2.0 / a * np.eye(self.d)) * g[..., None, None]

    def laplacian(self, x):
        _, r2, g = self._prep(x)
        a = self.width
        return (4.0 * r2 / a**2 - 2.0 * self.d / a) * g

    def grad_laplacian(self, x):
        x, r2, g = self._prep(x)
        a = self.width
        return x * (g * (4.0 * (self.d + 2) / a**2 - 8.0 * r2 / a**3))[..., None]

    def hessian_z(self, x):
        """``(nabla nabla g)(x) x``: the Hessian applied to its own argument."""
        x, r2, g = self._prep(x)
        a = self.width
        return x * (g * (4.0 * r2 / a**2 - 2.0 / a))[..., None]

    # Radial magnitudes |k(x)| as functions of r, with the radii where they change sign.
    def radial_profiles(self):
        a, d = self.width, self.d
        g = self.gaussian_radial
        return {
            "g": (lambda r: g(r**2), []),
            "grad_g": (lambda r: 2.0 * r / a * g(r**2), []),
            "laplacian_g": (lambda r: np.abs(4.0 * r**2 / a**2 - 2.0 * d / a) * g(r**2), [np.sqrt(d * a / 2)]),
            "grad_laplacian_g": (
                lambda r: r * np.abs(4.0 * (d + 2) / a**2 - 8.0 * r**2 / a**3) * g(r**2),
                [np.sqrt((d + 2) * a / 2)],
            ),
            "hessian_z": (lambda r: r * np.abs(4.0 * r**2 / a**2 - 2.0 / a) * g(r**2), [np.sqrt(a / 2)]),
        }


def sphere_area(d):
    return 2 * pi ** (d / 2) / gamma(d / 2)


def _gl_panels(edges, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * weights
    return x.ravel(), w.ravel()


def _panel_edges(lo, hi, breaks, panel):
    cuts = sorted({lo, hi, *[b for b in breaks if lo < b < hi]})
    edges = [lo]
    for a, b in zip(cuts[:-1], cuts[1:]):
        m = max(1, int(np.ceil((b - a) / panel)))
        edges.extend(np.linspace(a, b, m + 1)[1:])
    return np.array(edges)


def radial_l1(profile, d, radius, scale, breaks=(), rtol=1e-12, max_levels=8):
    """``int_{|x|<radius} profile(|x|) dx`` by Gauss-Legendre panels refined until stable.

    Returns ``(value, converged)``.
    """
    area = sphere_area(d)
    panel = scale
    previous = None
    for _ in range(max_levels):
        r, w = _gl_panels(_panel_edges(0.0, radius, breaks, panel), GL_ORDER)
        value = area * float(np.sum(w * profile(r) * r ** (d - 1)))
        if previous is not None and abs(value - previous) <= rtol * max(abs(value), 1e-300):
            return value, True
        previous = value
        panel /= 2
    return value, False


def cubature(func, lo, hi, rtol=1e-6, panels=8, max_levels=5, order=8, max_points=4_000_000):
    """Tensor Gauss-Legendre cubature over a box, refined globally until two levels agree.

    ``func`` maps points of shape ``(P, d)`` to values ``(P,)``.  Returns
    ``(value, converged)``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size
    previous = None
    value = np.nan
    for _ in range(max_levels):
        axes = [_gl_panels(np.linspace(lo[a], hi[a], panels + 1), order) for a in range(d)]
        if np.prod([len(x) for x, _ in axes]) > max_points:
            break
        grids = np.meshgrid(*[x for x, _ in axes], indexing="ij")
        weights = np.ones(grids[0].shape)
        for a, (_, w) in enumerate(axes):
            shape = [1] * d
            shape[a] = -1
            weights = weights * w.reshape(shape)
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        value = float(np.sum(weights.ravel() * func(pts)))
        if previous is not None and abs(value - previous) <= rtol * max(abs(value), 1e-300):
            return value, True
        previous = value
        panels *= 2
    return value, False


@dataclass
class KernelL1Table:
    spec: HeatKernelSpec
    values: dict
    converged: dict

    def predicted(self, name):
        """Exponent of ``nu t`` the norm is expected to scale with."""
        return PREDICTED_EXPONENTS[name]


def kernel_l1_norms(spec, box=12.0, rtol=1e-12):
    """L1 norms of g, grad g, Lap g, grad Lap g and (grad grad g)(z) z over a ball of radius ``box sqrt(nu t)``."""
    values, converged = {}, {}
    for name, (profile, breaks) in spec.radial_profiles().items():
        values[name], converged[name] = radial_l1(
            profile, spec.d, box * spec.scale, spec.scale / 2, breaks, rtol=rtol
        )
    return KernelL1Table(spec, values, converged)


def heat_mass_audits(nus=(0.1, 1.0), ts=None, d=2, tol=1e-8):
    """Audit ``||g_{nu t}||_1 = 1`` across a sweep of viscosities and times."""
    ts = np.logspace(-3, 0, 7) if ts is None else ts
    out = []
    for nu in nus:
        for t in ts:
            table = kernel_l1_norms(HeatKernelSpec(nu, t, d))
            out.append(
                BoundAudit(
                    "kernels.heat_mass",
                    abs(table.values["g"] - 1.0),
                    tol,
                    sweep={"nu": nu, "t": float(t), "d": d},
                    converged=table.converged["g"],
                    details={"mass": table.values["g"]},
                )
            )
    return out


def kernel_scaling_audits(nu=1.0, ts=None, d=2, tol=0.05):
    """Fit the t-exponent of every kernel L1 norm and compare with the predicted power."""
    ts = 2.0 ** -np.arange(0, 9) if ts is None else np.asarray(ts)
    tables = [kernel_l1_norms(HeatKernelSpec(nu, t, d)) for t in ts]
    out = []
    for name, predicted in PREDICTED_EXPONENTS.items():
        if name == "g":
            continue
        vals = [tab.values[name] for tab in tables]
        slope = fit_exponent(ts, vals)
        out.append(
            BoundAudit(
                f"kernels.exponent.{name}",
                abs(slope - predicted),
                tol,
                sweep={"nu": nu, "t": [float(t) for t in ts], "d": d},
                exponent_fit=slope,
                converged=all(tab.converged[name] for tab in tables),
                details={"predicted": predicted, "values": vals},
            )
        )
    return out


def s_profile(x, d=None):
    """``S(x) = 4 pi exp(-|x|^2) (|x|^2 - d/2)``."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1] if d is None else d
    r2 = (x**2).sum(axis=-1)
    return 4 * pi * np.exp(-r2) * (r2 - d / 2)


def s_profile_rescaled(x, nu, lag, include_nu=True):
    """``(4 pi nu lag)^{-(d/2+1)} S(x / sqrt(4 c lag))`` with ``c = nu`` or ``c = 1``."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    c = nu if include_nu else 1.0
    return (4 * pi * nu * lag) ** (-(d / 2 + 1)) * s_profile(x / np.sqrt(4 * c * lag), d)


def s_profile_rescaling_audit(nu, lag, d=2, samples=256, seed=0, tol=1e-10):
    """Compare the rescaled profile with the closed-form Laplacian, with and without ``nu`` in the argument."""
    spec = HeatKernelSpec(nu, lag, d)
    rng = np.random.default_rng(seed)
    x = rng.normal(scale=2 * spec.scale, size=(samples, d))
    truth = spec.laplacian(x)
    scale = np.abs(truth).max()
    with_nu = float(np.abs(s_profile_rescaled(x, nu, lag, True) - truth).max() / scale)
    without_nu = float(np.abs(s_profile_rescaled(x, nu, lag, False) - truth).max() / scale)
    return BoundAudit(
        "kernels.s_profile_rescaling",
        with_nu,
        tol,
        sweep={"nu": nu, "lag": lag, "d": d},
        details={"relative_error_without_nu": without_nu},
    )


# -- two-time kernel K -----------------------------------------------------

@dataclass(frozen=True)
class TranslationFlow:
    """Analytic flow ``X(a, t) = a + v t``."""

    velocity: tuple

    def positions(self, points, t):
        return np.asarray(points, dtype=float) + t * np.asarray(self.velocity, dtype=float)

    def lip_linf(self, T):
        """``||X - Id||_{Lip(0,T;L^inf)}``: Lipschitz quotient plus sup."""
        speed = float(np.linalg.norm(self.velocity))
        return speed * (1.0 + T)


def _k_from_positions(x, pos_s, pos_t, nu, lag):
    spec = HeatKernelSpec(nu, lag, np.asarray(x).shape[-1])
    return spec.laplacian(x - pos_s) - spec.laplacian(x - pos_t)


def k_kernel_eval(x, z, t, s, flow, nu):
    """``K(x, z, t, s) = Lap g_{nu(t-s)}(x - X(z,s)) - Lap g_{nu(t-s)}(x - X(z,t))``."""
    if not s < t:
        raise DomainError(f"need s < t, got s={s}, t={t}")
    if s < 0:
        raise DomainError(f"times must be nonnegative, got s={s}")
    return _k_from_positions(np.asarray(x, float), flow.positions(z, s), flow.positions(z, t), nu, t - s)


def shifted_laplacian_l1(shift, nu, lag, rtol=1e-6, box=12.0):
    """``|| Lap g_{nu lag} - Lap g_{nu lag}(. - shift) ||_1`` by tensor cubature."""
    shift = np.asarray(shift, dtype=float)
    d = shift.size
    if not np.any(shift):
        return 0.0, True
    spec = HeatKernelSpec(nu, lag, d)
    half = box * spec.scale + 0.5 * np.abs(shift)
    center = 0.5 * shift
    func = lambda y: np.abs(spec.laplacian(y) - spec.laplacian(y - shift))
    return cubature(func, center - half, center + half, rtol=rtol, panels=8)


def k_l1_sup_x(flow, t, s, nu, x_points, rtol=1e-6, box=12.0):
    """``sup_x int |K(x, z, t, s)| dz`` over the given sample points ``x``."""
    spec = HeatKernelSpec(nu, t - s, len(x_points[0]))
    best, ok = 0.0, True
    for x in np.asarray(x_points, dtype=float):
        # z ranges over labels whose positions at s or t lie near x
        half = box * spec.scale + _max_excursion(flow, x, t, s)
        func = lambda z, x=x: np.abs(k_kernel_eval(x, z, t, s, flow, nu))
        val, conv = cubature(func, x - half, x + half, rtol=rtol, max_levels=6, max_points=5_000_000)
        best, ok = max(best, val), ok and conv
    return best, ok


def k_l1_sup_z(flow, t, s, nu, z_points, rtol=1e-6, box=12.0):
    """``sup_z int |K(x, z, t, s)| dx``: for fixed z this is a shifted-Laplacian difference."""
    z_points = np.asarray(z_points, dtype=float)
    shifts = flow.positions(z_points, t) - flow.positions(z_points, s)
    best, ok = 0.0, True
    for w in shifts:
        val, conv = shifted_laplacian_l1(w, nu, t - s, rtol=rtol, box=box)
        best, ok = max(best, val), ok and conv
    return best, ok


def _max_excursion(flow, x, t, s):
    probe = np.asarray(x, dtype=float)[None, :]
    return float(
        max(np.abs(flow.positions(probe, t) - probe).max(), np.abs(flow.positions(probe, s) - probe).max())
    ) + 1e-12


def k_lemma_bound(constant, lip_linf, lag, nu):
    return constant * lip_linf / (np.sqrt(lag) * nu**1.5)


def k_l1_audit(flow, t, s, nu, T, constant, x_points=None, lip_linf=None, slack=0.0, rtol=1e-4):
    """Audit ``sup`` of the two L1 integrals of K against the lemma bound."""
    d = len(np.atleast_1d(getattr(flow, "velocity", np.zeros(2))))
    if x_points is None:
        x_points = np.zeros((1, d))
    lip = flow.lip_linf(T) if lip_linf is None else lip_linf
    sx, okx = k_l1_sup_x(flow, t, s, nu, x_points, rtol=rtol)
    sz, okz = k_l1_sup_z(flow, t, s, nu, x_points, rtol=rtol)
    return BoundAudit(
        "kernels.k_lemma",
        max(sx, sz),
        k_lemma_bound(constant, lip, t - s, nu),
        slack=slack,
        sweep={"nu": nu, "lag": t - s, "t": t, "s": s, "T": T},
        converged=okx and okz,
        details={"sup_x_dz": sx, "sup_z_dx": sz, "lip_linf": lip},
    )


def k_lemma_sweep(nus, speeds, lags, constant, T=1.0, d=2):
    """Translation-flow sweep; fits the |t-s| exponent of ``sup_x int |K| dz`` per (nu, v)."""
    audits = []
    for nu in nus:
        for speed in speeds:
            velocity = (speed,) + (0.0,) * (d - 1)
            flow = TranslationFlow(velocity)
            row = [k_l1_audit(flow, s + lag, s, nu, T, constant) for lag in lags for s in (0.0,)]
            slope = fit_exponent(lags, [a.details["sup_x_dz"] for a in row])
            for a in row:
                a.exponent_fit = slope
                a.sweep["speed"] = speed
            audits.extend(row)
    return audits


# -- generalized Young inequality -----------------------------------------

def lq_discrete(f, q, cell):
    f = np.abs(np.asarray(f, dtype=float))
    if np.isinf(q):
        return float(f.max())
    return float((np.sum(f**q) * cell) ** (1.0 / q))


def young_apply(table, f, q, cell):
    """Apply ``Tf(x) = sum_y K(x, y) f(y) cell`` and audit ``||Tf||_q <= C ||f||_q``.

    ``table`` is an ``(N, N)`` matrix over flattened nodes, ``cell`` the
    quadrature weight ``h^d``; ``C`` is the larger of the row and column sup-integrals.
    """
    table = np.asarray(table, dtype=float)
    flat = np.asarray(f, dtype=float).ravel()
    if table.shape != (flat.size, flat.size):
        raise ValueError(f"kernel table shape {table.shape} does not match {flat.size} nodes")
    Tf = table @ flat * cell
    row = float(np.abs(table).sum(axis=1).max() * cell)
    col = float(np.abs(table).sum(axis=0).max() * cell)
    C = max(row, col)
    audit = BoundAudit(
        "kernels.young",
        lq_discrete(Tf, q, cell),
        C * lq_discrete(flat, q, cell),
        slack=1e-12,
        sweep={"q": float(q)},
        details={"row_sup": row, "col_sup": col, "C": C},
    )
    return Tf.reshape(np.shape(f)), audit


def heat_kernel_table(grid, nu, t):
    """Periodised heat kernel ``K(x, y) = sum over images of g_{nu t}(x - y)`` on grid nodes."""
    spec = HeatKernelSpec(nu, t, grid.d)
    pts = grid.coords.reshape(grid.d, -1).T
    diff = pts[:, None, :] - pts[None, :, :]
    diff = (diff + grid.L / 2) % grid.L - grid.L / 2
    table = np.zeros(diff.shape[:2])
    for image in np.ndindex(*(3,) * grid.d):
        table += spec.value(diff + grid.L * (np.array(image) - 1))
    return table
