import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagreul.audit import PASS
from lagreul.data import alpha_cone, gaussian_tensor, random_solenoidal
from lagreul.errors import DomainError, SolverStateError
from lagreul.flowmap import FlowMap, audit_composition_bounds
from lagreul.grid import Grid, interpolate
from lagreul.spaces import HolderParams, holder_seminorm, lp_norm, m_x

PARAMS = HolderParams(pairs=1000)


def solenoidal_flow(grid, rng, amplitude=0.05, steps=4, T=0.5, scheme="trig"):
    w = amplitude * random_solenoidal(grid, rng)
    t = np.linspace(0.0, T, steps + 1).reshape((-1, 1) + (1,) * grid.d)
    return FlowMap(grid, t * w[None] + (t / T) ** 2 * 0.5 * w[None], T, scheme=scheme)


def analytic_flow(grid, rng, amplitude=0.1, steps=4, T=0.5, scheme="trig"):
    """Low-mode displacement with random phases: its inverse is analytic, so spectral interpolation is exact to roundoff."""
    x = grid.coords
    p = rng.uniform(0, 2 * np.pi, size=2)
    w = amplitude * np.stack([np.sin(x[1] + p[0]), np.cos(x[0] + p[1])])
    t = np.linspace(0.0, T, steps + 1).reshape((-1, 1) + (1,) * grid.d)
    return FlowMap(grid, t / T * w[None], T, scheme=scheme)


def shear_flow(grid, amplitude=0.3, steps=4, T=0.5, scheme="spline"):
    """``X(a) = (a_1 + s f(a_2), a_2)``: exactly volume preserving."""
    t = np.linspace(0.0, T, steps + 1).reshape((-1, 1) + (1,) * grid.d)
    w = np.stack([amplitude * np.sin(grid.coords[1]), np.zeros(grid.shape)])
    return FlowMap(grid, t / T * w[None], T, scheme=scheme)


def test_identity_inverse(grid32):
    flow = FlowMap.identity(grid32, 2, 1.0)
    assert np.all(flow.invert(2) == 0)


def test_constant_shift_inverse(grid32):
    flow = FlowMap.translation(grid32, (0.3, -0.2), 2, 1.0)
    assert np.array_equal(flow.invert(2), -flow.displacement[2])


@given(seed=st.integers(0, 2**32 - 1), amplitude=st.floats(0.01, 0.2))
def test_inversion_round_trip(seed, amplitude):
    grid = Grid(2, 32)
    rng = np.random.default_rng(seed)
    flow = analytic_flow(grid, rng, amplitude)
    j = flow.steps
    assert flow.inverse_residual(j) <= 1e-9 * grid.L
    # X^{-1}(X(a)) - a at the nodes, with the inverse map interpolated spectrally
    a = grid.coords.reshape(2, -1).T
    moved = a + flow.displacement[j].reshape(2, -1).T
    e = flow.invert(j)
    back = moved + np.stack([interpolate(e[k], moved, grid, "trig") for k in range(2)], -1)
    assert np.abs(back - a).max() <= 1e-9 * grid.L


def test_gradient_limit_is_enforced(grid32):
    x = grid32.coords
    disp = np.stack([np.zeros((2,) + grid32.shape), np.stack([0.6 * np.sin(x[1]), np.zeros(grid32.shape)])])
    with pytest.raises(SolverStateError):
        FlowMap(grid32, disp, 1.0)


def test_index_out_of_range(grid32):
    with pytest.raises(IndexError):
        FlowMap.identity(grid32, 2, 1.0).invert(3)


def test_compose_identity(grid32, rng):
    f = rng.standard_normal((2, 2) + grid32.shape)
    flow = FlowMap.identity(grid32, 2, 1.0)
    assert np.array_equal(flow.compose(f, 1, "inverse"), f)
    assert np.array_equal(flow.compose(f, 1, "forward"), f)


def test_compose_bad_direction(grid32):
    with pytest.raises(ValueError):
        FlowMap.identity(grid32, 2, 1.0).compose(np.zeros(grid32.shape), 1, "sideways")


def test_whole_cell_shift_is_a_roll(grid32, rng):
    f = rng.standard_normal(grid32.shape)
    flow = FlowMap.translation(grid32, (3 * grid32.h, 0.0), 1, 1.0)
    assert np.array_equal(flow.compose(f, 1, "inverse"), np.roll(f, 3, axis=0))


def test_compose_round_trip_band_limited(grid64, rng):
    x = grid64.coords
    f = np.sin(x[0]) * np.cos(2 * x[1]) + 0.3 * np.cos(3 * x[0] - x[1])
    flow = analytic_flow(grid64, rng, amplitude=0.2)
    forward = flow.compose(f, flow.steps, "forward")
    back = flow.compose(forward, flow.steps, "inverse")
    assert np.abs(back - f).max() <= 1e-6


def test_lebesgue_norm_preserved_by_volume_preserving_map(grid64):
    flow = shear_flow(grid64)
    j = flow.steps
    assert flow.volume_defect(j) < 1e-3
    tau = gaussian_tensor(grid64, 1.0, 0.6)
    assert lp_norm(flow.compose(tau, j, "inverse"), grid64, 2.0) == pytest.approx(lp_norm(tau, grid64, 2.0), rel=0.02)


def test_delta_split_constant_in_time(grid32, rng):
    flow = solenoidal_flow(grid32, rng)
    tau = np.broadcast_to(gaussian_tensor(grid32), (5, 2, 2) + grid32.shape)
    d1, _ = flow.delta_split(tau, 1, 3)
    assert np.all(d1 == 0)


def test_delta_split_identity_flow(grid32, rng):
    tau = rng.standard_normal((5, 2, 2) + grid32.shape)
    _, d2 = FlowMap.identity(grid32, 4, 1.0).delta_split(tau, 0, 4)
    assert np.all(d2 == 0)


def test_delta_split_sums_to_difference(grid32, rng):
    flow = solenoidal_flow(grid32, rng)
    tau = rng.standard_normal((5, 2, 2) + grid32.shape)
    d1, d2 = flow.delta_split(tau, 1, 3)
    direct = flow.compose(tau[1], 1, "inverse") - flow.compose(tau[3], 3, "inverse")
    assert np.abs(d1 + d2 - direct).max() <= 1e-10


def test_delta_split_index_order(grid32):
    with pytest.raises(DomainError):
        FlowMap.identity(grid32, 4, 1.0).delta_split(np.zeros((5,) + grid32.shape), 3, 3)


def test_identity_first_bound_is_equality(grid32, rng):
    flow = FlowMap.identity(grid32, 2, 0.5)
    tau = np.broadcast_to(gaussian_tensor(grid32), (3, 2, 2) + grid32.shape)
    xp = np.zeros((3, 2) + grid32.shape)
    first = audit_composition_bounds(flow, xp, tau, params=PARAMS)[0]
    assert first.measured == first.bound


def test_translated_cone_seminorm_bound(grid64):
    cone = alpha_cone(grid64, 0.5, 1.5)
    flow = FlowMap.translation(grid64, (0.37, 0.11), 2, 1.0, scheme="trig")
    lhs = holder_seminorm(flow.compose(cone, 2, "inverse"), grid64, PARAMS)
    rhs = holder_seminorm(cone, grid64, PARAMS) * m_x(flow, grid64, PARAMS) ** 0.5
    assert lhs / rhs <= 1.05


def test_composition_ratios_invariant_under_scaling(grid32, rng):
    flow = solenoidal_flow(grid32, rng)
    tau = np.broadcast_to(gaussian_tensor(grid32), (5, 2, 2) + grid32.shape)
    t = flow.times.reshape((-1, 1, 1, 1))
    xp = t * random_solenoidal(grid32, rng)[None]
    a = {x.audit_id: x for x in audit_composition_bounds(flow, xp, tau, params=PARAMS)}
    b = {x.audit_id: x for x in audit_composition_bounds(flow, 3.0 * xp, tau, params=PARAMS)}
    for key in ("flowmap.composition_c1_alpha", "flowmap.composition_lip_corrected", "flowmap.composition_w1p"):
        assert b[key].measured == pytest.approx(3 * a[key].measured, rel=1e-10)
        assert b[key].ratio == pytest.approx(a[key].ratio, rel=1e-10)


def test_composition_bounds_hold_for_small_flow(grid32, rng):
    flow = solenoidal_flow(grid32, rng)
    tau = rng.standard_normal((5, 2, 2) + grid32.shape) * 0.1 + gaussian_tensor(grid32)[None]
    xp = flow.times.reshape((-1, 1, 1, 1)) * random_solenoidal(grid32, rng)[None]
    for audit in audit_composition_bounds(flow, xp, tau, params=PARAMS):
        assert audit.verdict == PASS, audit.audit_id
