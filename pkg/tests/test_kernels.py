import numpy as np
import pytest
from scipy import integrate

from lagreul import calibration
from lagreul.audit import PASS
from lagreul.errors import DomainError
from lagreul.grid import Grid
from lagreul.kernels import (
    HeatKernelSpec,
    TranslationFlow,
    heat_kernel_table,
    heat_mass_audits,
    k_kernel_eval,
    k_l1_audit,
    kernel_l1_norms,
    kernel_scaling_audits,
    lq_discrete,
    s_profile,
    s_profile_rescaling_audit,
    young_apply,
)


class FrozenFlow:
    def positions(self, points, t):
        return np.asarray(points, dtype=float)

    def lip_linf(self, T):
        return 0.0


class SwappedTimes:
    """Translation flow with its two evaluation times exchanged."""

    def __init__(self, flow, s, t):
        self.flow, self.s, self.t = flow, s, t

    def positions(self, points, time):
        return self.flow.positions(points, self.t if time == self.s else self.s)


def test_kernel_at_origin():
    spec = HeatKernelSpec(0.3, 0.2, 2)
    assert spec.value(np.zeros(2)) == pytest.approx(1 / (4 * np.pi * 0.3 * 0.2), rel=1e-14)
    assert np.all(spec.grad(np.zeros(2)) == 0.0)


def test_nonpositive_time_is_domain_error():
    with pytest.raises(DomainError):
        HeatKernelSpec(1.0, 0.0)
    with pytest.raises(DomainError):
        HeatKernelSpec(-1.0, 1.0)


def test_derivatives_match_finite_differences(rng):
    spec = HeatKernelSpec(0.5, 0.3, 2)
    x = rng.normal(scale=0.5, size=(10, 2))
    eps = 1e-5
    e = np.eye(2) * eps
    fd_grad = np.stack([(spec.value(x + e[k]) - spec.value(x - e[k])) / (2 * eps) for k in range(2)], -1)
    assert np.abs(fd_grad - spec.grad(x)).max() < 1e-6 * np.abs(spec.grad(x)).max()
    fd_lap = sum((spec.value(x + e[k]) - 2 * spec.value(x) + spec.value(x - e[k])) / eps**2 for k in range(2))
    assert np.abs(fd_lap - spec.laplacian(x)).max() < 1e-3 * np.abs(spec.laplacian(x)).max()
    fd_gl = np.stack([(spec.laplacian(x + e[k]) - spec.laplacian(x - e[k])) / (2 * eps) for k in range(2)], -1)
    assert np.abs(fd_gl - spec.grad_laplacian(x)).max() < 1e-5 * np.abs(spec.grad_laplacian(x)).max()


def test_mass_by_independent_quadrature():
    spec = HeatKernelSpec(0.1, 0.01, 2)
    w = 10 * spec.scale
    mass, _ = integrate.dblquad(lambda y, x: spec.value(np.array([x, y])), -w, w, -w, w, epsabs=1e-12, epsrel=1e-12)
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_mass_audits_pass():
    audits = heat_mass_audits(ts=np.logspace(-3, 0, 4))
    assert all(a.verdict == PASS for a in audits)


def test_l1_norms_stable_under_box_doubling():
    spec = HeatKernelSpec(0.5, 0.1, 2)
    small = kernel_l1_norms(spec, box=10.0)
    large = kernel_l1_norms(spec, box=20.0)
    for name, value in small.values.items():
        assert abs(large.values[name] - value) <= 1e-6 * value


def test_gradient_l1_closed_form():
    # ||grad g_{nu t}||_1 = sqrt(pi / (nu t)) / 2 in two dimensions
    spec = HeatKernelSpec(0.7, 0.2, 2)
    value = kernel_l1_norms(spec).values["grad_g"]
    assert value == pytest.approx(np.sqrt(np.pi / (0.7 * 0.2)) / 2, rel=1e-8)


def test_scaling_exponents():
    audits = {a.audit_id: a for a in kernel_scaling_audits(tol=0.02)}
    assert audits["kernels.exponent.grad_g"].exponent_fit == pytest.approx(-0.5, abs=0.02)
    assert audits["kernels.exponent.grad_laplacian_g"].exponent_fit == pytest.approx(-1.5, abs=0.02)
    assert all(a.verdict == PASS for a in audits.values())


def test_s_profile_origin_and_symmetry(rng):
    assert s_profile(np.zeros(2)) == pytest.approx(-4 * np.pi * 2 / 2)
    x = rng.normal(size=(20, 3))
    r = np.linalg.norm(x, axis=-1)
    aligned = np.zeros_like(x)
    aligned[:, 0] = r
    # equal up to the rounding of |x|^2 through the square root
    assert np.allclose(s_profile(x), s_profile(aligned), rtol=1e-13, atol=1e-15)


def test_s_profile_rescaling_reconciled():
    audit = s_profile_rescaling_audit(0.4, 0.3)
    assert audit.verdict == PASS
    assert audit.details["relative_error_without_nu"] > 1e-3


def test_k_vanishes_for_frozen_flow(rng):
    x = rng.normal(size=(5, 2))
    z = rng.normal(size=(5, 2))
    assert np.all(k_kernel_eval(x, z, 0.3, 0.1, FrozenFlow(), 0.5) == 0.0)


def test_k_for_translation_flow_is_shifted_laplacian(rng):
    v = np.array([0.4, -0.2])
    flow = TranslationFlow(tuple(v))
    x = rng.normal(size=(8, 2))
    z = rng.normal(size=(8, 2))
    t, s, nu = 0.5, 0.2, 0.3
    spec = HeatKernelSpec(nu, t - s, 2)
    direct = spec.laplacian(x - z - v * s) - spec.laplacian(x - z - v * t)
    assert np.abs(k_kernel_eval(x, z, t, s, flow, nu) - direct).max() <= 1e-12 * np.abs(direct).max()


def test_k_swapping_times_flips_sign(rng):
    flow = TranslationFlow((0.4, 0.1))
    x = rng.normal(size=(8, 2))
    z = rng.normal(size=(8, 2))
    a = k_kernel_eval(x, z, 0.5, 0.2, flow, 0.3)
    b = k_kernel_eval(x, z, 0.5, 0.2, SwappedTimes(flow, 0.2, 0.5), 0.3)
    assert np.array_equal(a, -b)


def test_k_requires_ordered_times():
    with pytest.raises(DomainError):
        k_kernel_eval(np.zeros(2), np.zeros(2), 0.1, 0.1, FrozenFlow(), 1.0)


def test_k_audit_identity_flow():
    audit = k_l1_audit(FrozenFlow(), 0.2, 0.1, 1.0, 1.0, calibration.k_lemma_constant(), x_points=np.zeros((1, 2)))
    assert audit.measured == 0.0
    assert audit.verdict == PASS


def test_k_audit_small_lag_exponent():
    flow = TranslationFlow((0.5, 0.0))
    lags = [0.02, 0.04, 0.08]
    vals = [k_l1_audit(flow, lag, 0.0, 1.0, 1.0, 1.0).details["sup_x_dz"] for lag in lags]
    slope = np.polyfit(np.log(lags), np.log(vals), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.1)


def test_young_identity_table(rng):
    f = rng.normal(size=16)
    Tf, audit = young_apply(np.eye(16), f, 2.0, 1.0)
    assert np.array_equal(Tf, f)
    assert audit.ratio <= 1.0


def test_young_heat_kernel_contracts(rng):
    grid = Grid(2, 16)
    table = heat_kernel_table(grid, 0.5, 0.3)
    cell = grid.cell_volume
    for _ in range(100):
        f = rng.normal(size=grid.shape)
        for q in (1.5, 2.0, 4.0, np.inf):
            Tf, _ = young_apply(table, f, q, cell)
            assert lq_discrete(Tf, q, cell) <= lq_discrete(f, q, cell) * (1 + 1e-6)


def test_young_rank_one_constant(rng):
    a = rng.normal(size=12)
    b = rng.normal(size=12)
    cell = 0.1
    _, audit = young_apply(np.outer(a, b), rng.normal(size=12), 2.0, cell)
    expected = max(np.abs(a).max() * np.abs(b).sum() * cell, np.abs(b).max() * np.abs(a).sum() * cell)
    assert audit.details["C"] == pytest.approx(expected, rel=1e-10)
    assert audit.verdict == PASS
