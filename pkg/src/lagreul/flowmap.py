"""Time-sampled flow maps ``X(a, t) = a + d(a, t)`` with composition, inversion and audits.

Displacements are stored rather than positions, so every stored array is
periodic even though ``X`` itself is not.
"""
import numpy as np

from .audit import BoundAudit
from .errors import DomainError, InversionError, SolverStateError
from .grid import gradient, sample, spline_coefficients
from .spaces import HolderParams, field_path_norms, m_x

GRAD_LIMIT = 0.5
MAX_INVERSION_ITERATIONS = 50
INVERSION_TOL = 1e-10


def _whole_cell_shift(shift, grid, tol=1e-9):
    """Integer cell counts if ``shift`` is spatially constant and a whole number of cells per axis."""
    flat = shift.reshape(grid.d, -1)
    first = flat[:, 0]
    if not np.all(flat == first[:, None]):
        return None
    cells = first / grid.h
    rounded = np.round(cells)
    if np.any(np.abs(cells - rounded) > tol):
        return None
    return tuple(int(c) for c in rounded)


def _gradient_max(disp, grid):
    flat = disp.reshape(grid.d, -1)
    if np.all(flat == flat[:, :1]):
        return 0.0
    return float(np.abs(gradient(disp, grid)).max())


class FlowMap:
    """A flow map sampled at ``t_j = j T / steps``; ``displacement[j]`` has shape ``(d, *grid.shape)``."""

    def __init__(self, grid, displacement, T, scheme="spline", check=True):
        disp = np.asarray(displacement, dtype=float)
        if disp.ndim != grid.d + 2 or disp.shape[1:] != (grid.d,) + grid.shape:
            raise ValueError(f"displacement path must have shape (steps+1, {grid.d}, *grid), got {disp.shape}")
        if disp.shape[0] < 2:
            raise ValueError("a flow map needs at least two time samples")
        if not np.all(np.isfinite(disp)):
            raise SolverStateError("flow map displacement contains non-finite values")
        self.grid = grid
        self.displacement = disp
        self.T = float(T)
        self.scheme = scheme
        self.grad_max = [_gradient_max(d, grid) for d in disp]
        if check and max(self.grad_max) >= GRAD_LIMIT:
            j = int(np.argmax(self.grad_max))
            raise SolverStateError(
                f"displacement gradient {self.grad_max[j]:.3f} at sample {j} violates the {GRAD_LIMIT} limit"
            )
        self._inverse = {}
        self._coef = {}

    # -- construction ---------------------------------------------------------
    @classmethod
    def identity(cls, grid, steps, T, **kw):
        return cls(grid, np.zeros((steps + 1, grid.d) + grid.shape), T, **kw)

    @classmethod
    def translation(cls, grid, velocity, steps, T, **kw):
        v = np.asarray(velocity, dtype=float).reshape((1, grid.d) + (1,) * grid.d)
        t = np.linspace(0.0, T, steps + 1).reshape((-1, 1) + (1,) * grid.d)
        return cls(grid, np.broadcast_to(v * t, (steps + 1, grid.d) + grid.shape).copy(), T, **kw)

    @property
    def steps(self):
        return self.displacement.shape[0] - 1

    @property
    def dt(self):
        return self.T / self.steps

    @property
    def times(self):
        return np.linspace(0.0, self.T, self.steps + 1)

    def _check_index(self, j):
        if not 0 <= j <= self.steps:
            raise IndexError(f"time index {j} out of range 0..{self.steps}")

    def _coefficients(self, j):
        if j not in self._coef:
            self._coef[j] = spline_coefficients(self.displacement[j], self.grid)
        return self._coef[j]

    def _sample_displacement(self, j, coords, scheme=None):
        scheme = scheme or self.scheme
        coef = self._coefficients(j) if scheme == "spline" else None
        return sample(self.displacement[j], coords, self.grid, scheme, coefficients=coef)

    # -- inversion ------------------------------------------------------------
    def invert(self, j, scheme=None):
        """Inverse displacement ``e`` with ``X^{-1}(x) = x + e(x)`` at sample ``j``.

        Solves ``e = -d(x + e)`` by fixed-point iteration, warm-started from the
        previous sample's inverse when available.
        """
        self._check_index(j)
        key = (j, scheme or self.scheme)
        if key in self._inverse:
            return self._inverse[key]
        x = self.grid.coords
        disp = self.displacement[j]
        if not np.any(disp):
            e = np.zeros_like(disp)
        elif np.all(disp == disp.reshape(self.grid.d, -1)[:, :1].reshape((self.grid.d,) + (1,) * self.grid.d)):
            e = -disp.copy()
        else:
            prev = (j - 1, key[1])
            e = self._inverse[prev].copy() if prev in self._inverse else -disp.copy()
            tol = INVERSION_TOL * self.grid.L
            for _ in range(MAX_INVERSION_ITERATIONS):
                e_new = -self._sample_displacement(j, x + e, scheme)
                change = np.abs(e_new - e).max()
                e = e_new
                if change <= 0.1 * tol:
                    break
            residual = np.abs(e + self._sample_displacement(j, x + e, scheme))
            if residual.max() > tol:
                node = np.unravel_index(int(np.argmax(residual.max(axis=0))), self.grid.shape)
                raise InversionError(
                    f"inversion at sample {j} did not converge: residual {residual.max():.3e} at node {node}",
                    worst_node=node,
                    residual=float(residual.max()),
                )
        self._inverse[key] = e
        return e

    def inverse_residual(self, j, scheme=None):
        """``max |X(X^{-1}(x)) - x|`` at the nodes."""
        e = self.invert(j, scheme)
        return float(np.abs(e + self._sample_displacement(j, self.grid.coords + e, scheme)).max())

    # -- composition -----------------------------------------------------------
    def compose(self, f, j, direction="forward", scheme=None):
        """``f o X(t_j)`` (forward) or ``f o X(t_j)^{-1}`` (inverse) at the grid nodes."""
        self._check_index(j)
        scheme = scheme or self.scheme
        if direction == "forward":
            shift = self.displacement[j]
        elif direction == "inverse":
            shift = self.invert(j, scheme)
        else:
            raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
        if not np.any(shift):
            return np.array(f, dtype=float, copy=True)
        cells = _whole_cell_shift(shift, self.grid)
        if cells is not None:
            axes = tuple(range(-self.grid.d, 0))
            return np.roll(np.asarray(f, dtype=float), tuple(-c for c in cells), axis=axes)
        return sample(f, self.grid.coords + shift, self.grid, scheme)

    def compose_path(self, values, direction="forward", scheme=None):
        return np.stack([self.compose(values[j], j, direction, scheme) for j in range(self.steps + 1)])

    def positions(self, points, t):
        """``X(z, t)`` at arbitrary labels ``points`` (shape ``(..., d)``), linear in time between samples."""
        points = np.asarray(points, dtype=float)
        u = np.clip(t / self.dt, 0, self.steps)
        j = min(int(np.floor(u)), self.steps - 1)
        w = u - j
        coords = np.moveaxis(points, -1, 0)
        d0 = self._sample_displacement(j, coords)
        d1 = self._sample_displacement(j + 1, coords)
        return points + np.moveaxis((1 - w) * d0 + w * d1, 0, -1)

    def lip_linf(self, T=None):
        """``||X - Id||_{Lip(0,T;L^inf)}`` from consecutive samples."""
        sup = float(np.abs(self.displacement).max())
        lip = float(np.abs(np.diff(self.displacement, axis=0)).max() / self.dt)
        return sup + lip

    def volume_defect(self, j):
        """``max |det(I + grad d) - 1|`` at sample ``j``."""
        g = gradient(self.displacement[j], self.grid)
        jac = np.moveaxis(g, (0, 1), (-2, -1)) + np.eye(self.grid.d)
        return float(np.abs(np.linalg.det(jac) - 1.0).max())

    def max_volume_defect(self):
        return max(self.volume_defect(j) for j in range(self.steps + 1))

    # -- time splitting -----------------------------------------------------------
    def delta_split(self, tau, s_index, t_index, scheme=None):
        """``(Delta_1 tau, Delta_2 tau)`` whose sum is ``tau o X^{-1}(s) - tau o X^{-1}(t)``.

        ``Delta_1 = tau(X^{-1}(x,s), s) - tau(X^{-1}(x,s), t)`` and
        ``Delta_2 = tau(X^{-1}(x,s), t) - tau(X^{-1}(x,t), t)``.
        """
        if not s_index < t_index:
            raise DomainError(f"need s_index < t_index, got {s_index} and {t_index}")
        tau_s, tau_t = tau[s_index], tau[t_index]
        a = self.compose(tau_s, s_index, "inverse", scheme)
        b = self.compose(tau_t, s_index, "inverse", scheme)
        c = self.compose(tau_t, t_index, "inverse", scheme)
        return a - b, b - c


def audit_composition_bounds(flow, x_prime, tau, v=None, params=HolderParams(), slack=0.05, scheme=None):
    """The four composition inequalities for a flow map, with discrete estimators on both sides.

    ``x_prime`` is a displacement-like path (same shape as ``flow.displacement``),
    ``tau`` a field path and ``v`` a vector path (defaults to ``x_prime``).  The
    Lipschitz inequality is reported as printed and in a form with the factor
    ``1 + ||X - Id||_Lip``; the printed right side vanishes at ``X = Id``.
    """
    grid, T = flow.grid, flow.T
    v = x_prime if v is None else v
    mx = m_x(flow, grid, params)
    alpha = params.alpha

    def path(values, kind):
        return field_path_norms(values, grid, T, params, kind)

    inv = lambda values: flow.compose_path(values, "inverse", scheme)
    audits = []

    lhs = path(inv(tau), "c_alpha_p").sup_norm
    rhs = path(tau, "c_alpha_p").sup_norm * mx**alpha
    audits.append(BoundAudit("flowmap.composition_c_alpha_p", lhs, rhs, slack, {"T": T}, details={"m_x": mx}))

    xp_inv = inv(x_prime)
    lhs = path(xp_inv, "c1_alpha").sup_norm
    rhs = path(x_prime, "c1_alpha").sup_norm * mx ** (1 + 2 * alpha)
    audits.append(BoundAudit("flowmap.composition_c1_alpha", lhs, rhs, slack, {"T": T}, details={"m_x": mx}))

    lhs = path(inv(v), "w1p").sup_norm
    rhs = path(v, "w1p").sup_norm * mx
    audits.append(BoundAudit("flowmap.composition_w1p", lhs, rhs, slack, {"T": T}, details={"m_x": mx}))

    lhs = path(xp_inv, "c_alpha").lip_norm
    xp_lip = path(x_prime, "c1_alpha").lip_norm
    x_lip = path(flow.displacement, "c1_alpha").lip_norm
    printed = xp_lip * x_lip * mx ** (1 + 3 * alpha)
    corrected = xp_lip * (1 + x_lip) * mx ** (1 + 3 * alpha)
    details = {"m_x": mx, "x_prime_lip": xp_lip, "x_minus_id_lip": x_lip}
    audits.append(BoundAudit("flowmap.composition_lip_printed", lhs, printed, slack, {"T": T}, details=details))
    audits.append(BoundAudit("flowmap.composition_lip_corrected", lhs, corrected, slack, {"T": T}, details=details))
    return audits
