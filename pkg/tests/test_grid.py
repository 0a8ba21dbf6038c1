import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagreul.errors import NonFiniteFieldError
from lagreul.grid import (
    Grid,
    dft_forward,
    dft_inverse,
    divergence,
    gradient,
    interpolate,
    product,
    remove_nyquist,
    sample,
    spectral_derivative,
)
from lagreul.operators import leray_project


def test_grid_rejects_bad_sizes():
    with pytest.raises(ValueError):
        Grid(2, 7)
    with pytest.raises(ValueError):
        Grid(0, 16)
    with pytest.raises(ValueError):
        Grid(2, 16, -1.0)


def test_spacing_and_coordinates(grid32):
    assert grid32.h == pytest.approx(2 * np.pi / 32)
    assert grid32.coords.shape == (2, 32, 32)
    assert grid32.coords[0, 1, 0] == pytest.approx(grid32.h)


def test_dft_of_zero_is_zero(grid32):
    F = dft_forward(np.zeros(grid32.shape), grid32)
    assert np.all(F.coeffs == 0)


def test_dft_single_cosine_mode(grid32):
    x = grid32.coords
    F = dft_forward(np.cos(2 * np.pi * x[0] / grid32.L), grid32)
    big = np.argwhere(np.abs(F.coeffs) > 1e-12)
    assert sorted(F.wavevector(tuple(i)) for i in big) == [(-1, 0), (1, 0)]
    for i in big:
        assert F.coeffs[tuple(i)] == pytest.approx(0.5, abs=1e-14)
    assert F.is_hermitian()


def test_dft_rejects_non_finite(grid32):
    f = np.zeros(grid32.shape)
    f[3, 4] = np.nan
    with pytest.raises(NonFiniteFieldError):
        dft_forward(f, grid32)


@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-6, 1e6))
def test_dft_round_trip(seed, scale):
    grid = Grid(2, 16, 3.0)
    f = scale * np.random.default_rng(seed).standard_normal(grid.shape)
    back = dft_inverse(dft_forward(f, grid))
    assert np.abs(back - f).max() <= 1e-12 * np.abs(f).max()


def test_derivative_of_sine(grid64):
    x = grid64.coords
    c = 2 * np.pi / grid64.L
    d = spectral_derivative(np.sin(c * x[0]), grid64, 0)
    assert np.abs(d - c * np.cos(c * x[0])).max() <= 1e-10


def test_derivative_of_constant(grid32):
    assert np.abs(spectral_derivative(np.full(grid32.shape, 3.0), grid32, 1)).max() == 0.0


def test_derivative_axis_out_of_range(grid32):
    with pytest.raises(IndexError):
        spectral_derivative(np.zeros(grid32.shape), grid32, 2)


def test_projected_field_is_divergence_free(grid32, rng):
    u = leray_project(rng.standard_normal((2,) + grid32.shape), grid32)
    assert np.abs(divergence(u, grid32)).max() <= 1e-12 * np.abs(u).max() * grid32.n


@given(seed=st.integers(0, 2**32 - 1), shift=st.integers(0, 15), axis=st.integers(0, 1))
def test_derivative_commutes_with_grid_shift(seed, shift, axis):
    grid = Grid(2, 16)
    f = np.random.default_rng(seed).standard_normal(grid.shape)
    a = np.roll(spectral_derivative(f, grid, axis), shift, axis=0)
    b = spectral_derivative(np.roll(f, shift, axis=0), grid, axis)
    assert np.abs(a - b).max() <= 1e-12 * max(np.abs(a).max(), 1.0)


def test_gradient_layout(grid32):
    x = grid32.coords
    f = np.sin(x[0]) * np.cos(2 * x[1])
    g = gradient(f, grid32)
    assert np.abs(g[0] - np.cos(x[0]) * np.cos(2 * x[1])).max() < 1e-12
    assert np.abs(g[1] + 2 * np.sin(x[0]) * np.sin(2 * x[1])).max() < 1e-12


def test_interpolate_at_nodes_is_collocation(grid32, rng):
    f = rng.standard_normal(grid32.shape)
    idx = rng.integers(0, 32, size=(20, 2))
    pts = idx * grid32.h
    for scheme in ("trig", "spline"):
        assert np.allclose(interpolate(f, pts, grid32, scheme), f[idx[:, 0], idx[:, 1]], atol=1e-12)


def test_interpolate_empty_points(grid32):
    out = interpolate(np.zeros(grid32.shape), np.empty((0, 2)), grid32)
    assert out.shape == (0,)


def test_trig_interpolation_exact_on_modes(grid32, rng):
    x = grid32.coords
    f = np.cos(3 * x[0] - 2 * x[1]) + 0.5 * np.sin(x[1])
    pts = rng.uniform(-5, 20, size=(50, 2))
    exact = np.cos(3 * pts[:, 0] - 2 * pts[:, 1]) + 0.5 * np.sin(pts[:, 1])
    assert np.abs(interpolate(f, pts, grid32, "trig") - exact).max() <= 1e-10


def test_spline_interpolation_fourth_order(rng):
    pts = rng.uniform(0, 2 * np.pi, size=(200, 2))
    exact = np.cos(pts[:, 0])
    errors = []
    for n in (32, 64, 128):
        grid = Grid(2, n)
        errors.append(np.abs(interpolate(np.cos(grid.coords[0]), pts, grid, "spline") - exact).max())
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert errors[1] <= 10 * (2 * np.pi / 64) ** 4
    assert orders.min() >= 3.5


def test_sample_rejects_bad_coordinates(grid32):
    with pytest.raises(ValueError):
        sample(np.zeros(grid32.shape), np.zeros((3, 4)), grid32)
    with pytest.raises(ValueError):
        sample(np.zeros(grid32.shape), np.zeros((2, 4)), grid32, scheme="cubic")


def test_dealiased_product_matches_exact_product(grid32):
    x = grid32.coords
    a = np.sin(5 * x[0])[None]
    b = np.cos(4 * x[1])[None]
    out = product("i...,j...->ij...", a, b, grid32)
    assert np.abs(out[0, 0] - a[0] * b[0]).max() < 1e-12


def test_dealiasing_removes_aliased_modes():
    grid = Grid(1, 16)
    x = grid.coords[0]
    a = np.cos(6 * x)[None]
    # cos(6x)^2 = (1 + cos 12x)/2 and mode 12 aliases onto mode 4 on 16 points
    out = product("i...,j...->ij...", a, a, grid)[0, 0]
    assert np.abs(out - 0.5).max() < 1e-12
    assert np.abs(product("i...,j...->ij...", a, a, grid, dealias=False)[0, 0] - (0.5 + 0.5 * np.cos(4 * x))).max() < 1e-12


def test_remove_nyquist_keeps_lower_modes(grid32):
    x = grid32.coords
    f = np.cos(3 * x[0]) + np.cos(16 * x[1])
    assert np.abs(remove_nyquist(f, grid32) - np.cos(3 * x[0])).max() < 1e-12
