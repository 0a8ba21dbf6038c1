import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagreul import calibration
from lagreul.audit import PASS
from lagreul.data import gaussian_tensor, gaussian_vortex, random_symmetric
from lagreul.errors import DomainError
from lagreul.flowmap import FlowMap
from lagreul.grid import Grid, divergence, gradient, remove_nyquist
from lagreul.operators import (
    PathField,
    audit_G_bound,
    duhamel_G,
    duhamel_G_values,
    duhamel_U,
    duhamel_U_audit,
    duhamel_U_values,
    gamma_op,
    gamma_values,
    heat_contraction_audit,
    heat_semigroup,
    leray_project,
    riesz_leray_contract,
    riesz_product,
)
from lagreul.spaces import HolderParams


def constant_path(values, steps, T):
    return np.broadcast_to(values, (steps + 1,) + values.shape).copy()


def smooth_path(grid, T, steps, rng):
    t = np.linspace(0.0, T, steps + 1).reshape((-1,) + (1,) * (grid.d + 2))
    a, b = random_symmetric(grid, rng), random_symmetric(grid, rng)
    return remove_nyquist(a[None] + np.sin(3 * t) * b[None], grid)


def test_leray_fixes_divergence_free_fields(grid32, rng):
    u = leray_project(rng.standard_normal((2,) + grid32.shape), grid32)
    assert np.abs(leray_project(u, grid32) - u).max() <= 1e-12 * np.abs(u).max()


def test_leray_kills_gradients(grid32, rng):
    phi = remove_nyquist(rng.standard_normal(grid32.shape), grid32)
    phi -= phi.mean()
    assert np.abs(leray_project(gradient(phi, grid32), grid32)).max() <= 1e-12 * np.abs(gradient(phi, grid32)).max()


@given(seed=st.integers(0, 2**32 - 1))
def test_leray_is_idempotent(seed):
    grid = Grid(2, 16)
    u = np.random.default_rng(seed).standard_normal((2,) + grid.shape)
    once = leray_project(u, grid)
    assert np.abs(leray_project(once, grid) - once).max() <= 1e-12 * max(np.abs(once).max(), 1.0)


def test_riesz_on_aligned_mode(grid32):
    f = np.cos(3 * grid32.coords[0])
    assert np.abs(riesz_product(f, grid32, 0, 0) + f).max() < 1e-12


def test_riesz_trace_is_minus_identity(grid32, rng):
    # odd-order symbols drop Nyquist modes, so the identity holds on Nyquist-free fields
    f = remove_nyquist(rng.standard_normal(grid32.shape), grid32)
    trace = riesz_product(f, grid32, 0, 0) + riesz_product(f, grid32, 1, 1)
    assert np.abs(trace - (-f + f.mean())).max() < 1e-12


def test_riesz_symmetry(grid32, rng):
    f = rng.standard_normal(grid32.shape)
    assert np.abs(riesz_product(f, grid32, 0, 1) - riesz_product(f, grid32, 1, 0)).max() < 1e-14


def test_heat_at_time_zero_is_identity(grid32, rng):
    u = rng.standard_normal((2,) + grid32.shape)
    assert np.abs(heat_semigroup(u, grid32, 0.5, 0.0) - u).max() < 1e-13


def test_heat_single_mode_decay(grid32):
    x = grid32.coords
    A, nu, t = 1.3, 0.4, 0.7
    f = A * np.sin(2 * x[0] + 3 * x[1])
    expected = A * np.exp(-nu * t * 13) * np.sin(2 * x[0] + 3 * x[1])
    assert np.abs(heat_semigroup(f, grid32, nu, t) - expected).max() < 1e-13


def test_heat_negative_time():
    grid = Grid(2, 8)
    with pytest.raises(DomainError):
        heat_semigroup(np.zeros(grid.shape), grid, 1.0, -0.1)


def test_heat_contraction_sweep(grid64):
    u0 = gaussian_vortex(grid64, 0.5, 0.5)
    audit = heat_contraction_audit(u0, grid64, 0.2, np.geomspace(1e-3, 1.0, 6), HolderParams(pairs=2000))
    assert audit.verdict == PASS


def test_duhamel_of_zero(grid32):
    path = PathField(grid32, np.zeros((5, 2, 2) + grid32.shape), 0.5)
    assert np.all(duhamel_U(path, 0.3, 4) == 0)
    assert np.all(duhamel_G(path, 0.3, 4) == 0)
    assert np.all(gamma_op(path, 0.3, 4) == 0)


def test_duhamel_index_out_of_range(grid32):
    path = PathField(grid32, np.zeros((5, 2, 2) + grid32.shape), 0.5)
    with pytest.raises(IndexError):
        duhamel_U(path, 0.3, 5)


def test_path_field_needs_three_samples(grid32):
    with pytest.raises(ValueError):
        PathField(grid32, np.zeros((2, 2, 2) + grid32.shape), 0.5)


def test_duhamel_constant_single_mode_closed_form(grid32):
    x = grid32.coords
    nu, T, steps = 0.3, 0.8, 4
    sigma = np.zeros((2, 2) + grid32.shape)
    sigma[1, 0] = np.cos(x[0])  # (div sigma)_1 = -sin(x_1): transverse, kept by the projector
    sigma[0, 0] = np.cos(x[0])  # (div sigma)_0 = -sin(x_1): longitudinal, removed
    path = PathField(grid32, constant_path(sigma, steps, T), T)
    factor = (1 - np.exp(-nu * T)) / nu
    U = duhamel_U(path, nu, steps)
    assert np.abs(U[0]).max() < 1e-12
    assert np.abs(U[1] + factor * np.sin(x[0])).max() < 1e-10


def test_gamma_of_constant_path(grid32):
    # d/ds g_{nu(t-s)} = -nu Lap g_{nu(t-s)}, so the time integral of Lap g is -(delta - g_{nu t}) / nu
    nu, T, steps = 0.3, 0.5, 4
    f = remove_nyquist(gaussian_tensor(grid32, 1.0, 0.6), grid32)
    path = PathField(grid32, constant_path(f, steps, T), T)
    expected = -(f - heat_semigroup(f, grid32, nu, T)) / nu
    expected -= expected.mean(axis=(-2, -1), keepdims=True)
    assert np.abs(gamma_op(path, nu, steps) - expected).max() < 1e-8


def test_operator_identity_on_random_paths(grid32, rng):
    T, steps, nu = 0.3, 6, 0.2
    dt = T / steps
    for _ in range(20):
        sig = smooth_path(grid32, T, steps, rng)
        G = duhamel_G_values(sig, grid32, nu, dt)
        gradU = np.stack([gradient(u, grid32) for u in duhamel_U_values(sig, grid32, nu, dt)])
        RRH = np.stack([riesz_leray_contract(g, grid32) for g in gamma_values(sig, grid32, nu, dt)])
        scale = np.abs(G).max()
        assert np.abs(G - gradU).max() <= 1e-8 * scale
        assert np.abs(G - RRH).max() <= 1e-8 * scale


def test_duhamel_velocity_is_divergence_free(grid32, rng):
    sig = smooth_path(grid32, 0.4, 4, rng)
    U = duhamel_U_values(sig, grid32, 0.2, 0.1)
    for u in U:
        assert np.abs(divergence(u, grid32)).max() <= 1e-10


def test_exponential_integrator_second_order(grid32, rng):
    T, nu = 0.5, 0.2
    a, b = random_symmetric(grid32, rng), random_symmetric(grid32, rng)

    def final(steps):
        t = np.linspace(0.0, T, steps + 1).reshape((-1,) + (1,) * 4)
        sig = a[None] + np.sin(3 * t) * b[None]
        return duhamel_U_values(sig, grid32, nu, T / steps)[-1]

    reference = final(1024)
    errors = [np.abs(final(s) - reference).max() for s in (8, 16, 32)]
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert orders.min() >= 1.9


def test_duhamel_U_bound_over_two_decades(grid64):
    rng = np.random.default_rng(7)
    c = calibration.constant("duhamel_U")
    for T in (0.01, 0.1, 1.0):
        sig = smooth_path(grid64, T, 8, rng)
        audit = duhamel_U_audit(PathField(grid64, sig, T), 0.2, c, HolderParams(pairs=2000))
        assert audit.verdict == PASS, (T, audit.ratio)


def test_G_bound_degenerate_flow(grid32):
    T, steps = 0.2, 4
    tau = PathField(grid32, constant_path(gaussian_tensor(grid32, 0.5, 0.6), steps, T), T)
    flow = FlowMap.identity(grid32, steps, T)
    audit = audit_G_bound(tau, flow, 0.2, 1.0, HolderParams(pairs=500))
    assert audit.details["x_minus_id_lip"] == 0.0
    assert audit.details["stated_rhs"] == 0.0
    assert audit.measured > 0


def test_G_bound_zero_stress(grid32):
    T, steps = 0.2, 4
    tau = PathField(grid32, np.zeros((steps + 1, 2, 2) + grid32.shape), T)
    audit = audit_G_bound(tau, FlowMap.translation(grid32, (0.5, 0.0), steps, T), 0.2, 1.0)
    assert audit.measured == 0.0 and audit.bound == 0.0


def test_G_bound_translated_cone_sweep(grid64):
    c = calibration.constant("theorem_G")
    for T in (0.01, 0.1, 1.0):
        tau = calibration.translated_cone_stress(grid64, T, 4)
        flow = FlowMap.translation(grid64, (0.3, 0.1), 4, T)
        audit = audit_G_bound(tau, flow, 0.2, c, HolderParams(pairs=2000), "trig")
        assert audit.verdict == PASS, (T, audit.ratio)
