"""Loss specifications and the assumption checker."""

import numpy as np
import pytest

from restrict_est import LossSpec, check_assumptions, squared_error_location, squared_error_scale


def test_location_loss_values():
    loss = squared_error_location()
    assert loss.pivot == 0.0
    assert float(loss.w(0.0)) == 0.0
    assert float(loss.w(-2.0)) == 4.0
    assert float(loss.w_prime(3.0)) == 6.0
    np.testing.assert_allclose(loss.w(np.array([1.0, -1.0])), [1.0, 1.0])


def test_scale_loss_values():
    loss = squared_error_scale()
    assert loss.pivot == 1.0
    assert float(loss.w(1.0)) == 0.0
    assert float(loss.w(3.0)) == 4.0
    assert float(loss.w_prime(0.0)) == -2.0


@pytest.mark.parametrize("factory", [squared_error_location, squared_error_scale])
def test_squared_error_passes_assumptions(factory):
    loss = factory()
    grid = np.linspace(loss.pivot - 4.0, loss.pivot + 4.0, 81)
    report = check_assumptions(loss, grid)
    assert report.ok
    assert report.violations == ()
    assert report.plateaus == ()


def test_sine_is_rejected():
    bad = LossSpec(name="sine", w=np.sin, w_prime=np.cos, pivot=0.0)
    report = check_assumptions(bad, np.linspace(-4.0, 4.0, 41))
    assert not report.ok
    # negative values and a broken bowl both show up
    kinds = " ".join(desc for _, desc in report.violations)
    assert "negative" in kinds
    assert len(report.violations) >= 2


def test_absolute_error_with_undefined_derivative_point():
    loss = LossSpec(
        name="absolute-error",
        w=np.abs,
        w_prime=np.sign,
        pivot=0.0,
        w_prime_undefined_at=(0.0,),
    )
    report = check_assumptions(loss, np.linspace(-3.0, 3.0, 25))
    assert report.ok
    # sign() is flat away from zero: plateaus are recorded, not punished
    assert len(report.plateaus) > 0


def test_huber_plateaus_are_not_violations():
    def w(t):
        t = np.asarray(t, dtype=float)
        return np.where(np.abs(t) <= 1.0, t * t, 2.0 * np.abs(t) - 1.0)

    def w_prime(t):
        return np.clip(2.0 * np.asarray(t, dtype=float), -2.0, 2.0)

    loss = LossSpec(name="huber", w=w, w_prime=w_prime, pivot=0.0)
    report = check_assumptions(loss, np.linspace(-4.0, 4.0, 33))
    assert report.ok
    assert len(report.plateaus) > 0


def test_grid_must_have_three_points():
    with pytest.raises(ValueError):
        check_assumptions(squared_error_location(), [0.0, 1.0])


def test_shifted_minimum_is_flagged():
    off = LossSpec(
        name="off-center",
        w=lambda t: np.square(np.asarray(t, dtype=float) - 0.5),
        w_prime=lambda t: 2.0 * (np.asarray(t, dtype=float) - 0.5),
        pivot=0.0,
    )
    report = check_assumptions(off, np.linspace(-2.0, 2.0, 41))
    assert not report.ok
    assert any("pivot" in desc for _, desc in report.violations)
