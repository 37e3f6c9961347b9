"""Adaptive quadrature and monotone root finding.

Thin wrappers around scipy's QUADPACK and Brent routines that add the
conventions the rest of the package relies on: explicit evaluation budgets,
non-finite detection, interior breakpoints on possibly-infinite domains, and
bracket expansion from a caller-supplied hint.  Infinite endpoints are
handled by QUADPACK's own variable transformations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Literal

from scipy.integrate import quad as _quad
from scipy.optimize import brentq as _brentq

from .errors import (
    IntegrationBudgetError,
    NoRootError,
    NonFiniteIntegrandError,
    NumericsError,
)

DEFAULT_ABS_TOL = 1e-10
DEFAULT_REL_TOL = 1e-8
DEFAULT_ROOT_TOL = 1e-8
DEFAULT_MAX_EVALUATIONS = 1_000_000

Direction = Literal["non-increasing", "non-decreasing"]


@dataclass(frozen=True)
class Interval:
    """Open or half-open interval; endpoints may be -inf / +inf."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if not lo < hi:
            raise ValueError(f"interval requires lo < hi, got ({lo}, {hi})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, x: float) -> bool:
        return self.lo < x < self.hi


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


class _Budget:
    """Mutable evaluation counter shared across the segments of one call."""

    def __init__(self, limit: int):
        self.limit = int(limit)
        self.used = 0


class _BudgetSignal(Exception):
    pass


def _counted(f: Callable[[float], float], budget: _Budget) -> Callable[[float], float]:
    def wrapped(x: float) -> float:
        budget.used += 1
        if budget.used > budget.limit:
            raise _BudgetSignal()
        y = f(x)
        if not math.isfinite(y):
            raise NonFiniteIntegrandError(
                f"integrand returned {y!r} at x={x!r}", point=x
            )
        return y

    return wrapped


def _as_interval(domain) -> Interval:
    if isinstance(domain, Interval):
        return domain
    lo, hi = domain
    return Interval(lo, hi)


def integrate(
    f: Callable[[float], float],
    domain,
    abs_tol: float = DEFAULT_ABS_TOL,
    rel_tol: float = DEFAULT_REL_TOL,
    breakpoints: Iterable[float] = (),
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> QuadratureResult:
    """Integrate ``f`` over ``domain`` to the requested tolerances.

    ``breakpoints`` lists interior points where the integrand is known to be
    non-smooth; the domain is split there so the adaptive rule never
    straddles a kink.  Points outside the domain are ignored.

    Raises ``NonFiniteIntegrandError`` if the integrand returns NaN or inf,
    and ``IntegrationBudgetError`` (carrying the best estimate) if the
    requested accuracy is not reached within ``max_evaluations``.
    """
    iv = _as_interval(domain)
    if not (abs_tol > 0.0 and rel_tol > 0.0):
        raise ValueError("abs_tol and rel_tol must be positive")
    if max_evaluations < 21:
        raise ValueError("max_evaluations too small for a single quadrature rule")

    cuts = sorted({float(b) for b in breakpoints if iv.contains(float(b))})
    edges = [iv.lo, *cuts, iv.hi]
    nseg = len(edges) - 1

    budget = _Budget(max_evaluations)
    g = _counted(f, budget)
    seg_abs = abs_tol / nseg
    # Subdivision cap sized so QUADPACK alone cannot blow the eval budget.
    limit = max(50, min(800, max_evaluations // (21 * nseg)))

    total = 0.0
    err = 0.0
    try:
        for a, b in zip(edges[:-1], edges[1:]):
            out = _quad(g, a, b, epsabs=seg_abs, epsrel=rel_tol, limit=limit, full_output=1)
            value, abserr = out[0], out[1]
            if len(out) > 3:  # QUADPACK raised a convergence warning
                if abserr > 10.0 * max(seg_abs, rel_tol * abs(value)):
                    raise IntegrationBudgetError(
                        f"quadrature on [{a}, {b}] did not converge: {out[3].strip()}",
                        estimate=total + value,
                        abs_error_estimate=err + abserr,
                        evaluations=budget.used,
                    )
            total += value
            err += abserr
    except _BudgetSignal:
        raise IntegrationBudgetError(
            f"evaluation budget of {max_evaluations} exhausted",
            estimate=total,
            abs_error_estimate=None,
            evaluations=budget.used,
        ) from None
    return QuadratureResult(value=total, abs_error_estimate=err, evaluations=budget.used)


def find_root_monotone(
    g: Callable[[float], float],
    direction: Direction,
    hint: float,
    tol: float = DEFAULT_ROOT_TOL,
    max_expansions: int = 200,
) -> float:
    """Find the root of a monotone scalar function.

    ``direction`` states how ``g`` varies with its argument and decides on
    which side of ``hint`` the bracket is grown.  The bracket expands
    geometrically (sliding, so it stays tight on the near side) and the
    enclosed root is polished with Brent's method to ``tol``.
    """
    if direction not in ("non-increasing", "non-decreasing"):
        raise ValueError(f"unknown direction {direction!r}")
    hint = float(hint)
    if not math.isfinite(hint):
        raise ValueError("hint must be finite")
    if not tol > 0.0:
        raise ValueError("tol must be positive")

    fa = g(hint)
    if not math.isfinite(fa):
        raise NumericsError(f"root equation returned {fa!r} at hint {hint!r}")
    if fa == 0.0:
        return hint

    # A monotone g tells us which side of the hint the sign change is on.
    move_right = (fa > 0.0) == (direction == "non-increasing")
    step = 0.5 * max(1.0, abs(hint))
    a = hint
    for _ in range(max_expansions):
        b = a + step if move_right else a - step
        if not math.isfinite(b):
            break
        fb = g(b)
        if not math.isfinite(fb):
            raise NumericsError(f"root equation returned {fb!r} at {b!r}")
        if fb == 0.0:
            return b
        if (fa > 0.0) != (fb > 0.0):
            lo, hi = (a, b) if a < b else (b, a)
            return float(_brentq(g, lo, hi, xtol=tol))
        a, fa = b, fb
        step *= 2.0
    raise NoRootError(
        f"no sign change between {hint!r} and {a!r} after {max_expansions} expansions",
        searched=(min(hint, a), max(hint, a)),
    )
