"""Periodic grids, spectral transforms, differentiation and interpolation.

Fields are plain numpy arrays whose trailing ``d`` axes are the spatial grid
axes; any leading axes are components (vector: ``(d, *shape)``, tensor:
``(d, d, *shape)``).  Gradients prepend the derivative index, so for a vector
``u`` the array ``gradient(u)[k, j]`` holds ``d u_j / d x_k``.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft
from scipy import ndimage

from .errors import NonFiniteFieldError
from .parallel import worker_count

MAX_POINTS = 2**27


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the box ``[0, L)^d`` with ``n`` points per axis."""

    d: int = 2
    n: int = 128
    L: float = 2 * np.pi

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d}")
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"points per axis must be an even integer >= 8, got {self.n}")
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError(f"box length must be positive, got {self.L}")
        if self.n**self.d > MAX_POINTS:
            raise ValueError(f"grid with {self.n}^{self.d} points exceeds the {MAX_POINTS} point guard")

    @property
    def h(self):
        return self.L / self.n

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def size(self):
        return self.n**self.d

    @property
    def axes(self):
        return tuple(range(-self.d, 0))

    @property
    def cell_volume(self):
        return self.h**self.d

    @property
    def spectral_shape(self):
        return (self.n,) * (self.d - 1) + (self.n // 2 + 1,)

    @cached_property
    def x1d(self):
        return np.arange(self.n) * self.h

    @cached_property
    def coords(self):
        """Node coordinates, shape ``(d, *shape)``."""
        return np.stack(np.meshgrid(*([self.x1d] * self.d), indexing="ij"))

    @cached_property
    def k(self):
        """Integer wavevector components in real-FFT layout (broadcastable)."""
        full = np.fft.fftfreq(self.n, 1.0 / self.n)
        half = np.fft.rfftfreq(self.n, 1.0 / self.n)
        out = []
        for a in range(self.d):
            shape = [1] * self.d
            shape[a] = -1
            out.append((half if a == self.d - 1 else full).reshape(shape))
        return tuple(out)

    @cached_property
    def xi(self):
        """Physical wavenumbers ``2 pi k / L`` in real-FFT layout."""
        return tuple(2 * np.pi * k / self.L for k in self.k)

    @cached_property
    def xi_odd(self):
        """Wavenumbers with the Nyquist entry zeroed, for odd-order multipliers."""
        out = []
        for k, xi in zip(self.k, self.xi):
            xi = xi.copy()
            xi[np.abs(k) == self.n // 2] = 0.0
            out.append(xi)
        return tuple(out)

    @cached_property
    def xi_sq(self):
        return sum(x**2 for x in self.xi)

    @cached_property
    def nyquist_mask(self):
        mask = np.zeros(self.spectral_shape, dtype=bool)
        for k in self.k:
            mask = mask | (np.abs(k) == self.n // 2)
        return mask

    def zeros(self, components=()):
        return np.zeros(tuple(components) + self.shape)

    def describe(self):
        return {"d": self.d, "n": self.n, "L": self.L}


@dataclass
class SpectralField:
    """Normalised DFT coefficients: a field ``cos(2 pi x_1 / L)`` has value 1/2 at ``k = +-e_1``."""

    grid: Grid
    coeffs: np.ndarray

    def wavevector(self, index):
        """Integer wavevector of the coefficient stored at ``index`` (full FFT layout)."""
        n = self.grid.n
        return tuple(int(i) if i < n // 2 else int(i) - n for i in index)

    def is_hermitian(self, tol=1e-12):
        c = self.coeffs
        flipped = np.conj(np.roll(np.flip(c, axis=self.grid.axes), 1, axis=self.grid.axes))
        scale = max(np.abs(c).max(), 1e-300)
        return bool(np.abs(c - flipped).max() <= tol * scale)


def check_finite(values, name="field"):
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        raise NonFiniteFieldError(f"{name} contains non-finite samples")
    return values


def fft(f, grid):
    """Unnormalised real FFT over the spatial axes (internal layout)."""
    return sfft.rfftn(f, axes=grid.axes, workers=worker_count())


def ifft(F, grid):
    return sfft.irfftn(F, s=grid.shape, axes=grid.axes, workers=worker_count())


def apply_symbol(f, grid, symbol):
    """Multiply the spectrum of every component of ``f`` by ``symbol``."""
    return ifft(fft(f, grid) * symbol, grid)


def dft_forward(f, grid):
    f = check_finite(f)
    coeffs = sfft.fftn(f, axes=grid.axes, workers=worker_count()) / grid.size
    return SpectralField(grid, coeffs)


def dft_inverse(F):
    grid = F.grid
    values = sfft.ifftn(F.coeffs * grid.size, axes=grid.axes, workers=worker_count())
    return np.ascontiguousarray(values.real)


def spectral_derivative(f, grid, axis):
    """Derivative along ``axis`` by multiplication with ``i xi``; the Nyquist mode is dropped."""
    if not 0 <= axis < grid.d:
        raise IndexError(f"axis {axis} out of range for a {grid.d}-dimensional grid")
    return apply_symbol(check_finite(f), grid, 1j * grid.xi_odd[axis])


def gradient(f, grid):
    """Gradient with the derivative index first: ``out[k, ...] = d_k f[...]``."""
    F = fft(f, grid)
    return np.stack([ifft(1j * xi * F, grid) for xi in grid.xi_odd])


def divergence(f, grid):
    """Contract the last component index with the derivative: ``(div f)_j = sum_k d_k f_jk``."""
    F = fft(f, grid)
    spatial = (slice(None),) * grid.d
    return ifft(sum(1j * grid.xi_odd[k] * F[(Ellipsis, k) + spatial] for k in range(grid.d)), grid)


def laplacian(f, grid):
    return apply_symbol(f, grid, -grid.xi_sq)


def remove_nyquist(f, grid):
    """Project onto the modes with ``|k_a| < n/2`` on every axis."""
    F = fft(f, grid)
    F[..., grid.nyquist_mask] = 0.0
    return ifft(F, grid)


def _pad_indices(n, m, last):
    if last:
        return np.arange(n // 2), np.arange(n // 2)
    src = np.concatenate([np.arange(n // 2), np.arange(n // 2 + 1, n)])
    dst = np.concatenate([np.arange(n // 2), np.arange(m - n // 2 + 1, m)])
    return src, dst


def _spectral_index(grid, m):
    src, dst = [], []
    for a in range(grid.d):
        s, t = _pad_indices(grid.n, m, a == grid.d - 1)
        src.append(s)
        dst.append(t)
    return np.ix_(*src), np.ix_(*dst)


def pad_field(f, grid):
    """Resample a field on the 3/2-refined grid by zero padding its spectrum."""
    m = 3 * grid.n // 2
    F = fft(f, grid)
    src, dst = _spectral_index(grid, m)
    G = np.zeros(F.shape[: F.ndim - grid.d] + (m,) * (grid.d - 1) + (m // 2 + 1,), dtype=complex)
    G[(Ellipsis,) + dst] = F[(Ellipsis,) + src] * (m / grid.n) ** grid.d
    return sfft.irfftn(G, s=(m,) * grid.d, axes=grid.axes, workers=worker_count())


def truncate_field(p, grid):
    """Inverse of :func:`pad_field`: keep the modes representable on ``grid`` (no Nyquist)."""
    m = 3 * grid.n // 2
    P = sfft.rfftn(p, axes=grid.axes, workers=worker_count())
    src, dst = _spectral_index(grid, m)
    F = np.zeros(P.shape[: P.ndim - grid.d] + grid.spectral_shape, dtype=complex)
    F[(Ellipsis,) + src] = P[(Ellipsis,) + dst] * (grid.n / m) ** grid.d
    return ifft(F, grid)


def product(subscripts, a, b, grid, dealias=True):
    """Quadratic pointwise product ``einsum(subscripts, a, b)`` with 3/2-rule dealiasing.

    Subscripts name component indices only and must end with ``...`` for the
    spatial axes, e.g. ``"i...,ijk...->jk..."``.
    """
    if not dealias:
        return np.einsum(subscripts, a, b)
    return truncate_field(np.einsum(subscripts, pad_field(a, grid), pad_field(b, grid)), grid)


# -- interpolation ---------------------------------------------------------

def _trig_basis(grid, x):
    """Per-axis trigonometric basis matrix ``(P, n)``; the Nyquist column is a cosine."""
    half = grid.n // 2
    steps = np.empty((x.size, half + 1), dtype=complex)
    steps[:, 0] = 1.0
    steps[:, 1:] = np.exp(2j * np.pi * x / grid.L)[:, None]
    powers = np.cumprod(steps, axis=1)  # e^{i k theta}, k = 0..n/2
    E = np.empty((x.size, grid.n), dtype=complex)
    E[:, :half] = powers[:, :half]
    E[:, half] = powers[:, half].real
    E[:, half + 1:] = np.conj(powers[:, half - 1:0:-1])
    return E


def _sample_trig(f, coords, grid, chunk=4096):
    comps = f.shape[: f.ndim - grid.d]
    flat = f.reshape((-1,) + grid.shape)
    C = sfft.fftn(flat, axes=grid.axes, workers=worker_count()) / grid.size
    pts = coords.reshape(grid.d, -1)
    out = np.empty((flat.shape[0], pts.shape[1]))
    for start in range(0, pts.shape[1], chunk):
        sl = slice(start, start + chunk)
        E = [_trig_basis(grid, pts[a, sl]) for a in range(grid.d)]
        for c in range(flat.shape[0]):
            A = np.tensordot(E[0], C[c], axes=(1, 0))
            for a in range(1, grid.d):
                A = np.einsum("pk,pk...->p...", E[a], A)
            out[c, sl] = A.real
    return out.reshape(comps + coords.shape[1:])


def spline_coefficients(f, grid):
    """Periodic cubic B-spline coefficients of every component (reusable prefilter)."""
    flat = f.reshape((-1,) + grid.shape)
    coef = np.empty_like(flat)
    for c in range(flat.shape[0]):
        coef[c] = ndimage.spline_filter(flat[c], order=3, mode="grid-wrap")
    return coef.reshape(f.shape)


def _sample_spline(f, coords, grid, coefficients=None):
    comps = f.shape[: f.ndim - grid.d]
    coef = spline_coefficients(f, grid) if coefficients is None else coefficients
    coef = coef.reshape((-1,) + grid.shape)
    idx = coords / grid.h
    out = np.empty((coef.shape[0],) + coords.shape[1:])
    for c in range(coef.shape[0]):
        out[c] = ndimage.map_coordinates(coef[c], idx, order=3, mode="grid-wrap", prefilter=False)
    return out.reshape(comps + coords.shape[1:])


def sample(f, coords, grid, scheme="spline", coefficients=None):
    """Evaluate ``f`` at physical coordinates ``coords`` of shape ``(d, *S)`` (wrapped periodically)."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape[0] != grid.d:
        raise ValueError(f"coordinates must have leading axis {grid.d}, got shape {coords.shape}")
    if scheme == "trig":
        return _sample_trig(np.asarray(f, dtype=float), coords, grid)
    if scheme == "spline":
        return _sample_spline(np.asarray(f, dtype=float), coords, grid, coefficients)
    raise ValueError(f"unknown interpolation scheme {scheme!r}")


def interpolate(f, points, grid, scheme="trig"):
    """Values of ``f`` at a list of positions ``points`` with shape ``(P, d)``."""
    f = check_finite(f)
    points = np.asarray(points, dtype=float)
    comps = f.shape[: f.ndim - grid.d]
    if points.size == 0:
        return np.empty(comps + (0,))
    points = points.reshape(-1, grid.d)
    return sample(f, points.T, grid, scheme)
