"""Loss functions and checks on the shape assumptions the theory needs.

A location loss is evaluated at the estimation error ``est - theta`` and
must be a non-negative bowl around 0 with a non-decreasing derivative.  A
scale loss is evaluated at the ratio ``est / theta`` and must be a bowl
around 1.  ``check_assumptions`` verifies those properties numerically on a
caller-supplied grid; it cannot prove them, but a clean report plus the
package's root diagnostics covers the way the losses are actually used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class LossSpec:
    """A loss ``w`` with derivative ``w_prime``, centered at ``pivot``.

    ``pivot`` is 0 for location losses and 1 for scale losses.  Both
    callables must accept numpy arrays.  Points where the derivative is not
    defined (e.g. 0 for absolute error) are listed in
    ``w_prime_undefined_at`` and skipped by the monotonicity check.
    """

    name: str
    w: Callable
    w_prime: Callable
    pivot: float
    w_prime_undefined_at: tuple = field(default=())


@dataclass(frozen=True)
class AssumptionReport:
    ok: bool
    grid_used: tuple
    violations: tuple
    plateaus: tuple


def squared_error_location() -> LossSpec:
    return LossSpec(
        name="squared-error",
        w=lambda t: np.square(t),
        w_prime=lambda t: 2.0 * np.asarray(t, dtype=float),
        pivot=0.0,
    )


def squared_error_scale() -> LossSpec:
    return LossSpec(
        name="squared-error",
        w=lambda t: np.square(np.asarray(t, dtype=float) - 1.0),
        w_prime=lambda t: 2.0 * (np.asarray(t, dtype=float) - 1.0),
        pivot=1.0,
    )


def _is_undefined(x: float, undefined: tuple) -> bool:
    return any(abs(x - u) <= _ZERO_TOL for u in undefined)


def check_assumptions(loss: LossSpec, grid: Sequence[float]) -> AssumptionReport:
    """Check bowl shape, non-negativity, w(pivot)=0 and monotone derivative.

    Violations are reported as (point, description) pairs.  Flat stretches
    of the derivative are legitimate (absolute error has them) and are
    recorded separately as plateaus rather than rejected.
    """
    pts = np.asarray(sorted(set(float(x) for x in grid)), dtype=float)
    if pts.size < 3:
        raise ValueError("assumption grid needs at least 3 distinct points")

    violations = []
    plateaus = []

    w_pivot = float(loss.w(loss.pivot))
    if abs(w_pivot) > _ZERO_TOL:
        violations.append((loss.pivot, f"w(pivot) = {w_pivot!r}, expected 0"))

    w_vals = np.asarray(loss.w(pts), dtype=float)
    if not np.all(np.isfinite(w_vals)):
        bad = pts[~np.isfinite(w_vals)][0]
        raise ValueError(f"loss is not finite at grid point {bad!r}")
    for x, wx in zip(pts, w_vals):
        if wx < -_ZERO_TOL:
            violations.append((float(x), f"w({x}) = {wx!r} is negative"))

    # Bowl shape: non-increasing left of the pivot, non-decreasing right.
    scale = max(1.0, float(np.max(np.abs(w_vals))))
    slack = _ZERO_TOL * scale
    for x0, x1, w0, w1 in zip(pts[:-1], pts[1:], w_vals[:-1], w_vals[1:]):
        if x1 <= loss.pivot and w1 > w0 + slack:
            violations.append((float(x1), "w increases left of the pivot"))
        if x0 >= loss.pivot and w1 < w0 - slack:
            violations.append((float(x1), "w decreases right of the pivot"))

    defined = np.array([not _is_undefined(x, loss.w_prime_undefined_at) for x in pts])
    dpts = pts[defined]
    d_vals = np.asarray(loss.w_prime(dpts), dtype=float)
    d_scale = max(1.0, float(np.max(np.abs(d_vals)))) if d_vals.size else 1.0
    for x0, x1, d0, d1 in zip(dpts[:-1], dpts[1:], d_vals[:-1], d_vals[1:]):
        if d1 < d0 - _ZERO_TOL * d_scale:
            violations.append((float(x1), "w' decreases"))
        elif d1 <= d0 + _ZERO_TOL * d_scale:
            plateaus.append((float(x0), float(x1)))

    return AssumptionReport(
        ok=not violations,
        grid_used=tuple(float(x) for x in pts),
        violations=tuple(violations),
        plateaus=tuple(plateaus),
    )
