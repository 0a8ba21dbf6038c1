import pytest

from lagreul import calibration
from lagreul.audit import PASS


def test_k_lemma_constant_matches_frozen_value():
    assert calibration.k_lemma_constant() == pytest.approx(calibration.constant("k_lemma"), rel=1e-3)


@pytest.mark.parametrize("name", sorted(calibration.MEASURES))
def test_frozen_constant_holds_on_held_out_seed(name):
    assert calibration.audit(name, seed=1).verdict == PASS


@pytest.mark.parametrize("name", ["heat_gradient", "cz", "commutator_U"])
def test_calibration_seed_uses_half_the_constant(name):
    # headroom 2 and rounding up leave the calibration ratio at or just below one half
    ratio = calibration.audit(name, seed=0).ratio
    assert 0.4 <= ratio <= 1 / calibration.HEADROOM


def test_unknown_constant():
    with pytest.raises(KeyError):
        calibration.constant("lemma_zero")
