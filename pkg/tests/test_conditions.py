"""Numeric certificates for the ratio-ordering conditions."""

import numpy as np
import pytest

from restrict_est import (
    DirectionUnknownError,
    Orientation,
    check_lemma_implications,
    check_ratio_monotone,
    check_theorem_hypothesis,
    make_alpha_family,
    make_brewster_zidek,
    make_stein_clamped,
    required_psi_monotonicity,
    required_sign,
    stein_psi,
)


# ---------------------------------------------------------------------------
# pdf-level ratio direction


def test_normal_negative_slope_is_non_decreasing(neg_normal):
    report = check_ratio_monotone(neg_normal, 1)
    assert report.direction == "non-decreasing"
    assert not report.degenerate
    assert report.violations == ()
    # the opposing hypothesis is soundly rejected
    assert len(report.violations_non_increasing) > 0


def test_normal_positive_slope_flips(skew_normal):
    report = check_ratio_monotone(skew_normal, 1)
    assert report.direction == "non-increasing"
    assert report.violations == ()


def test_normal_component_two(std_normal):
    report = check_ratio_monotone(std_normal, 2)
    assert report.direction == "non-increasing"
    assert report.violations == ()


def test_degenerate_model_has_constant_ratio(degenerate_normal):
    report = check_ratio_monotone(degenerate_normal, 1)
    assert report.degenerate
    assert report.direction == "indeterminate"
    assert report.violations_non_decreasing == ()
    assert report.violations_non_increasing == ()


def test_crg_directions(crg):
    r1 = check_ratio_monotone(crg, 1)
    assert r1.direction == "non-decreasing"
    assert r1.violations == ()
    r2 = check_ratio_monotone(crg, 2)
    assert r2.direction == "non-increasing"
    assert r2.violations == ()


def test_cdf_level_inherits_direction(neg_normal):
    report = check_ratio_monotone(neg_normal, 1, level="cdf")
    assert report.direction == "non-decreasing"
    assert report.violations == ()


def test_grid_refinement_is_stable(crg):
    coarse = check_ratio_monotone(crg, 1, t_grid=tuple(np.geomspace(0.05, 20.0, 15)))
    fine = check_ratio_monotone(crg, 1, t_grid=tuple(np.geomspace(0.05, 20.0, 61)))
    assert coarse.direction == fine.direction == "non-decreasing"


def test_generic_model_with_reduced_grids(generic_product_normal):
    report = check_ratio_monotone(
        generic_product_normal,
        1,
        delta_grid=(0.5, 1.0),
        t_grid=tuple(np.linspace(-3.0, 3.0, 7)),
        s_grid=tuple(np.linspace(-2.0, 2.0, 7)),
        tol=1e-6,
    )
    assert report.direction == "non-decreasing"
    assert report.violations == ()


def test_delta_grid_validation(std_normal, crg):
    with pytest.raises(ValueError):
        check_ratio_monotone(std_normal, 1, delta_grid=(-0.5,))
    with pytest.raises(ValueError):
        check_ratio_monotone(crg, 1, delta_grid=(0.5,))
    with pytest.raises(ValueError):
        check_ratio_monotone(std_normal, 1, level="hazard")


# ---------------------------------------------------------------------------
# implied orderings


def test_lemma_implications_normal(neg_normal):
    pdf_report = check_ratio_monotone(neg_normal, 1)
    lemma = check_lemma_implications(pdf_report, neg_normal, 1)
    assert lemma.cdf_direction_matches
    assert lemma.hazard_direction_opposite
    assert lemma.ok


def test_lemma_implications_crg_component_two(crg):
    pdf_report = check_ratio_monotone(crg, 2)
    lemma = check_lemma_implications(pdf_report, crg, 2)
    assert lemma.cdf.direction == "non-increasing"
    assert lemma.hazard.direction == "non-decreasing"
    assert lemma.ok


# ---------------------------------------------------------------------------
# dominance-theorem hypotheses for candidate adjustments


def test_required_sign_and_monotonicity_mappings():
    assert required_sign("non-decreasing") == 1
    assert required_sign("non-increasing") == -1
    with pytest.raises(DirectionUnknownError):
        required_sign("indeterminate")
    assert required_psi_monotonicity(Orientation.LOCATION, "non-decreasing") == "non-increasing"
    assert required_psi_monotonicity(Orientation.LOCATION, "non-increasing") == "non-decreasing"
    assert required_psi_monotonicity(Orientation.SCALE, "non-decreasing") == "non-decreasing"
    assert required_psi_monotonicity(Orientation.SCALE, "non-increasing") == "non-increasing"


def test_bz_satisfies_hypothesis(std_normal, loc_loss):
    est = make_brewster_zidek(std_normal, 1, loc_loss)
    report = check_theorem_hypothesis(std_normal, 1, loc_loss, est.psi)
    assert report.required_sign == 1
    assert report.required_psi_monotonicity == "non-increasing"
    assert report.sign_violations == ()
    assert report.monotonicity_violations == ()
    assert report.limit_ok
    assert report.ok


def test_clamped_stein_satisfies_hypothesis(crg, scale_loss):
    est = make_stein_clamped(crg, 1, scale_loss)
    report = check_theorem_hypothesis(crg, 1, scale_loss, est.psi)
    assert report.required_sign == 1
    assert report.required_psi_monotonicity == "non-decreasing"
    assert report.ok


def test_raw_stein_fails_the_limit_condition(std_normal, loc_loss):
    psi = lambda t: stein_psi(std_normal, 1, loc_loss, t)
    report = check_theorem_hypothesis(std_normal, 1, loc_loss, psi)
    assert report.sign_violations == ()
    assert not report.limit_ok
    assert not report.ok


def test_overshooting_family_fails_the_sign_condition(std_normal, loc_loss):
    # alpha below beta0 scales the adjustment past the cdf-kernel root
    spec = std_normal.normal
    est = make_alpha_family(spec, 1, "smooth", 0.2)
    assert not est.params["in_dominance_range"]
    report = check_theorem_hypothesis(std_normal, 1, loc_loss, est.psi)
    assert len(report.sign_violations) > 0
    assert not report.ok


def test_hypothesis_for_flipped_direction(skew_normal, loc_loss):
    est = make_stein_clamped(skew_normal, 1, loc_loss)
    report = check_theorem_hypothesis(skew_normal, 1, loc_loss, est.psi)
    assert report.required_sign == -1
    assert report.required_psi_monotonicity == "non-decreasing"
    assert report.ok


def test_hypothesis_requires_direction(generic_product_normal, loc_loss):
    with pytest.raises(DirectionUnknownError):
        check_theorem_hypothesis(generic_product_normal, 1, loc_loss, lambda t: 0.0)
