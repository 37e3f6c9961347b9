"""Improved equivariant estimation of ordered location and scale parameters.

The package provides dominating estimators for the smaller-or-equal component
pair (theta1 <= theta2) of a bivariate distribution, built from the
unrestricted best equivariant rule by conditioning on the order statistic:

* smooth adjusted estimators solved from a conditional-cdf weighted equation,
* clamped single-crossing estimators solved from a conditional-pdf weighted
  equation and cut off at the unrestricted constant,
* one-parameter families interpolating between them (bivariate normal).

Supporting machinery: bivariate normal and compound exponential scale models
(plus a generic numeric-quadrature model), squared error losses, numeric
certificates for the ratio-ordering conditions that drive the improvement
results, and a deterministic Monte Carlo risk simulator.
"""

from .errors import (
    ConditioningError,
    ConfigError,
    DataError,
    DirectionUnknownError,
    DomainError,
    IntegrationBudgetError,
    ModelConstructionError,
    ModelError,
    NoRootError,
    NonFiniteIntegrandError,
    NumericsError,
    ParameterError,
    PlanError,
    RestrictEstError,
)
from .numerics import Interval, QuadratureResult, find_root_monotone, integrate
from .loss import (
    AssumptionReport,
    LossSpec,
    check_assumptions,
    squared_error_location,
    squared_error_scale,
)
from .models import (
    BivariateModel,
    NormalSpec,
    Orientation,
    conditional_cdf,
    cr_gamma_model,
    generic_model,
    normal_model,
)
from .estimators import (
    CLAMP_RULES,
    EquivariantEstimator,
    KernelEquation,
    alpha_family_psi,
    alpha_in_dominance_range,
    best_equivariant_constant,
    bz_psi,
    default_direction,
    evaluate,
    kernel_equation,
    make_alpha_family,
    make_best_equivariant,
    make_brewster_zidek,
    make_custom,
    make_stein_clamped,
    mills_ratio,
    stein_clamped_psi,
    stein_psi,
)
from .conditions import (
    ConditionReport,
    LemmaImplicationReport,
    RatioViolation,
    TheoremHypothesisReport,
    check_lemma_implications,
    check_ratio_monotone,
    check_theorem_hypothesis,
    required_psi_monotonicity,
    required_sign,
)
from .risksim import (
    DominanceReport,
    DominanceRow,
    RiskCurve,
    SimPlan,
    dominance_report,
    simulate,
    write_risk_csv,
)
from .plots import risk_curve_figure, save_figure_svg
from .config import RunConfig, effective_config_text, load_config

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport",
    "BivariateModel",
    "CLAMP_RULES",
    "ConditionReport",
    "ConditioningError",
    "ConfigError",
    "DataError",
    "DirectionUnknownError",
    "DomainError",
    "DominanceReport",
    "DominanceRow",
    "EquivariantEstimator",
    "IntegrationBudgetError",
    "Interval",
    "KernelEquation",
    "LemmaImplicationReport",
    "LossSpec",
    "ModelConstructionError",
    "ModelError",
    "NoRootError",
    "NonFiniteIntegrandError",
    "NormalSpec",
    "NumericsError",
    "Orientation",
    "ParameterError",
    "PlanError",
    "QuadratureResult",
    "RatioViolation",
    "RestrictEstError",
    "RiskCurve",
    "RunConfig",
    "SimPlan",
    "TheoremHypothesisReport",
    "alpha_family_psi",
    "alpha_in_dominance_range",
    "best_equivariant_constant",
    "bz_psi",
    "check_assumptions",
    "check_lemma_implications",
    "check_ratio_monotone",
    "check_theorem_hypothesis",
    "conditional_cdf",
    "cr_gamma_model",
    "default_direction",
    "dominance_report",
    "effective_config_text",
    "evaluate",
    "find_root_monotone",
    "generic_model",
    "integrate",
    "kernel_equation",
    "load_config",
    "make_alpha_family",
    "make_best_equivariant",
    "make_brewster_zidek",
    "make_custom",
    "make_stein_clamped",
    "mills_ratio",
    "normal_model",
    "required_psi_monotonicity",
    "required_sign",
    "risk_curve_figure",
    "save_figure_svg",
    "simulate",
    "squared_error_location",
    "squared_error_scale",
    "stein_clamped_psi",
    "stein_psi",
    "write_risk_csv",
]
