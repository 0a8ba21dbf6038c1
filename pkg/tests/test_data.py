import numpy as np
import pytest

from lagreul.data import (
    alpha_cone,
    constant_tensor,
    gaussian_tensor,
    gaussian_vortex,
    make_field,
    random_solenoidal,
    random_symmetric,
    smooth_random,
    torus_offset,
)
from lagreul.errors import ConfigError
from lagreul.grid import Grid, divergence


def test_vortex_is_divergence_free(grid32):
    assert np.abs(divergence(gaussian_vortex(grid32), grid32)).max() <= 1e-12


def test_random_solenoidal_is_divergence_free(grid32, rng):
    assert np.abs(divergence(random_solenoidal(grid32, rng), grid32)).max() <= 1e-12


def test_three_dimensional_vortex_is_divergence_free(rng):
    grid = Grid(3, 16)
    assert np.abs(divergence(gaussian_vortex(grid, 1.0, 0.8), grid)).max() <= 1e-10


def test_tensors_are_symmetric(grid32, rng):
    for t in (gaussian_tensor(grid32), random_symmetric(grid32, rng), constant_tensor(grid32, 2.0)):
        assert np.array_equal(t, np.swapaxes(t, 0, 1))


def test_tensor_matrix_shape(grid32):
    with pytest.raises(ConfigError):
        gaussian_tensor(grid32, matrix=np.eye(3))


def test_torus_offset_wraps(grid32):
    off = torus_offset(grid32)
    assert off.min() >= -grid32.L / 2 and off.max() < grid32.L / 2


def test_alpha_cone(grid32):
    cone = alpha_cone(grid32, 0.5, 1.0)
    assert cone.max() == pytest.approx(1.0) and cone.min() == 0.0
    with pytest.raises(ConfigError):
        alpha_cone(grid32, 0.5, grid32.L)


def test_smooth_random_unit_sup(grid32, rng):
    f = smooth_random(grid32, (2,), rng)
    assert np.abs(f).max() == pytest.approx(1.0)
    assert abs(f.mean()) < 1e-12


def test_make_field(grid32):
    assert make_field(grid32, "zero_tensor").shape == (2, 2) + grid32.shape
    with pytest.raises(ConfigError):
        make_field(grid32, "sheet")
