"""Exception types shared across the package."""


class RestrictEstError(Exception):
    """Base class for errors raised by this package."""


class NumericsError(RestrictEstError):
    """Base class for quadrature and root-finding failures."""


class NonFiniteIntegrandError(NumericsError):
    """The integrand returned NaN or +/-inf inside the integration domain."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class IntegrationBudgetError(NumericsError):
    """Quadrature did not converge within the evaluation budget.

    Carries the best available estimate so callers can decide whether to
    accept a degraded result.
    """

    def __init__(self, message, estimate=None, abs_error_estimate=None, evaluations=None):
        super().__init__(message)
        self.estimate = estimate
        self.abs_error_estimate = abs_error_estimate
        self.evaluations = evaluations


class NoRootError(NumericsError):
    """Bracket expansion found no sign change for the root equation."""

    def __init__(self, message, searched=None):
        super().__init__(message)
        self.searched = searched


class ModelError(RestrictEstError):
    """Base class for model definition and evaluation problems."""


class ParameterError(ModelError, ValueError):
    """A model parameter is out of its admissible range."""


class ModelConstructionError(ModelError):
    """A user-supplied density failed a construction-time sanity check."""


class ConditioningError(ModelError):
    """Conditional quantity requested at a point with zero marginal mass."""


class DomainError(RestrictEstError, ValueError):
    """An input lies outside the mathematical domain of the operation."""


class DirectionUnknownError(RestrictEstError):
    """Monotonicity direction of the density ratio is needed but not known.

    Raised by the clamped-estimator constructor when the model carries no
    closed-form sign analysis and the caller supplied no direction.  Run the
    conditions verifier (``restrict_est.conditions.check_ratio_monotone`` or
    ``restrict-est verify-conditions``) and pass the declared direction.
    """


class PlanError(RestrictEstError, ValueError):
    """A simulation plan failed validation."""


class ConfigError(RestrictEstError):
    """A run configuration file is malformed or inconsistent."""


class DataError(RestrictEstError):
    """An input data file is malformed."""
