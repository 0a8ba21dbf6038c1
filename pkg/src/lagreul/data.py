"""Named analytic field families used by the solver, the audits and the manifests."""
import numpy as np

from .errors import ConfigError
from .grid import spectral_derivative
from .operators import leray_project


def _center(grid, center):
    if center is None:
        return np.full(grid.d, grid.L / 2)
    c = np.asarray(center, dtype=float)
    if c.shape != (grid.d,):
        raise ConfigError(f"center must have {grid.d} coordinates, got {c.shape}")
    return c


def torus_offset(grid, center=None):
    """Per-axis offset ``x - center`` wrapped into ``[-L/2, L/2)``; shape ``(d, *grid.shape)``."""
    c = _center(grid, center).reshape((grid.d,) + (1,) * grid.d)
    return (grid.coords - c + grid.L / 2) % grid.L - grid.L / 2


def gaussian_bump(grid, amplitude=1.0, width=0.5, center=None):
    """``amplitude exp(-|x - c|^2 / (2 width^2))`` with the torus distance."""
    r2 = (torus_offset(grid, center) ** 2).sum(axis=0)
    return amplitude * np.exp(-r2 / (2 * width**2))


def perpendicular_gradient(psi, grid):
    """``(d_2 psi, -d_1 psi)``: divergence-free under the spectral derivative (2D only)."""
    if grid.d != 2:
        raise ConfigError("a stream function needs d = 2")
    return np.stack([spectral_derivative(psi, grid, 1), -spectral_derivative(psi, grid, 0)])


def gaussian_vortex(grid, amplitude=1.0, width=0.5, center=None):
    """Velocity of a Gaussian stream function; in ``d > 2`` the Leray projection of a bump along ``e_1``."""
    psi = gaussian_bump(grid, amplitude, width, center)
    if grid.d == 2:
        return perpendicular_gradient(psi, grid)
    u = np.zeros((grid.d,) + grid.shape)
    u[0] = psi
    return leray_project(u, grid)


def gaussian_tensor(grid, amplitude=1.0, width=0.5, center=None, matrix=None):
    """Symmetric tensor ``amplitude * M * bump`` (``M`` defaults to ``diag(1, 1/2, ...)`` plus off-diagonal 0.3)."""
    if matrix is None:
        M = np.diag(1.0 / (1.0 + np.arange(grid.d))) + 0.3 * (1 - np.eye(grid.d))
    else:
        M = np.asarray(matrix, dtype=float)
        if M.shape != (grid.d, grid.d):
            raise ConfigError(f"matrix must be {grid.d}x{grid.d}")
    M = 0.5 * (M + M.T)
    return np.multiply.outer(M, gaussian_bump(grid, amplitude, width, center))


def constant_tensor(grid, value=1.0):
    """``value * Id`` at every node."""
    return value * np.multiply.outer(np.eye(grid.d), np.ones(grid.shape))


def alpha_cone(grid, alpha=0.5, radius=1.0, center=None):
    """``max(radius^alpha - |x - c|^alpha, 0)``: Hoelder-``alpha`` with its tip at ``c``."""
    if not 0 < radius < grid.L / 2:
        raise ConfigError(f"cone radius must lie in (0, L/2), got {radius}")
    r = np.sqrt((torus_offset(grid, center) ** 2).sum(axis=0))
    return np.maximum(radius**alpha - r**alpha, 0.0)


def smooth_random(grid, components, rng, cutoff=3):
    """Random real trigonometric polynomial with ``0 < |k| <= cutoff`` scaled to unit sup norm."""
    x = grid.coords
    out = np.zeros(tuple(components) + grid.shape)
    scale = 2 * np.pi / grid.L
    for kv in np.ndindex(*(2 * cutoff + 1,) * grid.d):
        k = np.array(kv) - cutoff
        if 0 < np.sqrt((k**2).sum()) <= cutoff:
            phase = scale * np.tensordot(k, x, axes=1)
            a, b = rng.standard_normal((2,) + tuple(components))
            out += np.multiply.outer(a, np.cos(phase)) + np.multiply.outer(b, np.sin(phase))
    return out / max(float(np.abs(out).max()), 1e-300)


def localized_random(grid, components, rng, width=0.8, cutoff=3, center=None):
    """Smooth random field under a Gaussian envelope (decays well inside the box)."""
    return smooth_random(grid, components, rng, cutoff) * gaussian_bump(grid, 1.0, width, center)


def random_symmetric(grid, rng, width=0.8, cutoff=3, center=None):
    t = localized_random(grid, (grid.d, grid.d), rng, width, cutoff, center)
    return 0.5 * (t + np.swapaxes(t, 0, 1))


def random_solenoidal(grid, rng, width=0.8, cutoff=3, center=None):
    """Divergence-free localized random vector field."""
    if grid.d == 2:
        return perpendicular_gradient(localized_random(grid, (), rng, width, cutoff, center), grid)
    return leray_project(localized_random(grid, (grid.d,), rng, width, cutoff, center), grid)


FAMILIES = {
    "zero_vector": lambda grid, **kw: np.zeros((grid.d,) + grid.shape),
    "zero_tensor": lambda grid, **kw: np.zeros((grid.d, grid.d) + grid.shape),
    "gaussian_vortex": gaussian_vortex,
    "gaussian_tensor": gaussian_tensor,
    "constant_tensor": constant_tensor,
    "alpha_cone": alpha_cone,
}


def make_field(grid, family, **params):
    """Build a named family on ``grid``; unknown names raise :class:`ConfigError`."""
    try:
        builder = FAMILIES[family]
    except KeyError:
        raise ConfigError(f"unknown field family {family!r}; choose from {sorted(FAMILIES)}") from None
    return builder(grid, **params)
