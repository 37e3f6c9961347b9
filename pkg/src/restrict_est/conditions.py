"""Numeric verification of the monotone-ratio conditions behind dominance.

The improvement results hinge on the conditional kernels having a monotone
likelihood-type ratio in the conditioning value s: the pdf-level ratio
h_i(t'|s) / h_i(t|s) (with t' = t - delta for location models, t / delta for
scale models) must move one way in s.  These checks evaluate the ratios on
finite grids, so a clean report is a certificate for the grid, not a proof;
grids are caller-extendable and the defaults are refined enough that a
direction flip would have to hide between adjacent points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DirectionUnknownError
from .estimators import (
    KernelEquation,
    best_equivariant_constant,
    default_direction,
    kernel_equation,
)
from .loss import LossSpec
from .models import BivariateModel, Orientation

DEFAULT_RATIO_TOL = 1e-9
DEFAULT_UNDERFLOW_FLOOR = 1e-280


@dataclass(frozen=True)
class RatioViolation:
    delta: float
    t: float
    s_lo: float
    s_hi: float
    ratio_lo: float
    ratio_hi: float


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of one ratio-monotonicity sweep.

    ``direction`` is declared only when exactly one of the two hypotheses
    survives without violations; if both survive the grid cannot tell
    (``degenerate``), if neither does the ratio is genuinely non-monotone on
    the grid.
    """

    kernel_level: str
    component: int
    direction: str
    degenerate: bool
    delta_grid: tuple
    t_grid: tuple
    s_grid: tuple
    violations_non_decreasing: tuple
    violations_non_increasing: tuple
    skipped: tuple
    tolerance: float

    @property
    def violations(self) -> tuple:
        if self.direction == "non-decreasing":
            return self.violations_non_decreasing
        if self.direction == "non-increasing":
            return self.violations_non_increasing
        return tuple(
            sorted(
                set(self.violations_non_decreasing) | set(self.violations_non_increasing),
                key=lambda v: (v.delta, v.t, v.s_lo),
            )
        )


@dataclass(frozen=True)
class LemmaImplicationReport:
    pdf: ConditionReport
    cdf: ConditionReport
    hazard: ConditionReport
    cdf_direction_matches: bool
    hazard_direction_opposite: bool

    @property
    def ok(self) -> bool:
        return self.cdf_direction_matches and self.hazard_direction_opposite


@dataclass(frozen=True)
class TheoremHypothesisReport:
    component: int
    direction: str
    required_sign: int
    required_psi_monotonicity: str
    t_grid: tuple
    sign_values: tuple
    sign_violations: tuple
    monotonicity_violations: tuple
    c0: float
    limit_t: float
    limit_value: float
    limit_ok: bool

    @property
    def ok(self) -> bool:
        return not self.sign_violations and not self.monotonicity_violations and self.limit_ok


def default_delta_grid(orientation: Orientation) -> tuple:
    if Orientation(orientation) is Orientation.LOCATION:
        return (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)
    return (1.0, 1.25, 1.5, 2.0, 4.0)


def default_t_grid(model: BivariateModel, points: int = 41) -> tuple:
    if model.orientation is Orientation.LOCATION:
        span = 5.0 * model.d_scale()
        return tuple(np.linspace(-span, span, points))
    return tuple(np.geomspace(0.02, 50.0, points))


def default_s_grid(model: BivariateModel, component: int, points: int = 41) -> tuple:
    qs = np.linspace(0.005, 0.995, points)
    return tuple(float(model.marginal_ppf(component, q)) for q in qs)


def _shifted(orientation: Orientation, t: float, delta: float) -> float:
    if orientation is Orientation.LOCATION:
        return t - delta
    return t / delta


def _scan_pairs(ratio_points, tol):
    """Classify adjacent ratio moves against both monotonicity hypotheses."""
    viol_nondec = []
    viol_noninc = []
    for (s0, r0), (s1, r1) in zip(ratio_points[:-1], ratio_points[1:]):
        slack = tol * max(abs(r0), abs(r1))
        if r1 < r0 - slack:
            viol_nondec.append((s0, s1, r0, r1))
        if r1 > r0 + slack:
            viol_noninc.append((s0, s1, r0, r1))
    return viol_nondec, viol_noninc


def check_ratio_monotone(
    model: BivariateModel,
    component: int,
    level: str = "pdf",
    delta_grid: Optional[tuple] = None,
    t_grid: Optional[tuple] = None,
    s_grid: Optional[tuple] = None,
    tol: float = DEFAULT_RATIO_TOL,
    underflow_floor: float = DEFAULT_UNDERFLOW_FLOOR,
) -> ConditionReport:
    """Sweep the kernel ratio over (delta, t, s) grids and declare a direction.

    ``level`` picks the conditional pdf or cdf.  Grid points where a kernel
    value is below ``underflow_floor`` are skipped and recorded rather than
    compared, since their ratios carry no information.
    """
    model._check_component(component)
    if level not in ("pdf", "cdf"):
        raise ValueError(f"level must be 'pdf' or 'cdf', got {level!r}")
    orientation = model.orientation
    deltas = tuple(default_delta_grid(orientation)) if delta_grid is None else tuple(delta_grid)
    ts = tuple(default_t_grid(model)) if t_grid is None else tuple(t_grid)
    ss = tuple(default_s_grid(model, component)) if s_grid is None else tuple(s_grid)
    if orientation is Orientation.LOCATION and any(d < 0.0 for d in deltas):
        raise ValueError("location shifts must satisfy delta >= 0")
    if orientation is Orientation.SCALE and any(d < 1.0 for d in deltas):
        raise ValueError("scale shifts must satisfy delta >= 1")

    kernel = model.cond_pdf if level == "pdf" else model.cond_cdf
    viol_nondec = []
    viol_noninc = []
    skipped = []
    for delta in deltas:
        for t in ts:
            t_shift = _shifted(orientation, t, delta)
            pts = []
            for s in ss:
                num = float(kernel(component, t_shift, s))
                den = float(kernel(component, t, s))
                if num < underflow_floor or den < underflow_floor:
                    skipped.append((delta, t, s))
                    continue
                pts.append((s, num / den))
            nd, ni = _scan_pairs(pts, tol)
            viol_nondec.extend(RatioViolation(delta, t, *v) for v in nd)
            viol_noninc.extend(RatioViolation(delta, t, *v) for v in ni)

    if not viol_nondec and viol_noninc:
        direction, degenerate = "non-decreasing", False
    elif viol_nondec and not viol_noninc:
        direction, degenerate = "non-increasing", False
    elif not viol_nondec and not viol_noninc:
        direction, degenerate = "indeterminate", True
    else:
        direction, degenerate = "indeterminate", False

    return ConditionReport(
        kernel_level=level,
        component=component,
        direction=direction,
        degenerate=degenerate,
        delta_grid=deltas,
        t_grid=ts,
        s_grid=ss,
        violations_non_decreasing=tuple(viol_nondec),
        violations_non_increasing=tuple(viol_noninc),
        skipped=tuple(skipped),
        tolerance=tol,
    )


def _check_hazard_monotone(
    model: BivariateModel,
    component: int,
    t_grid: tuple,
    s_grid: tuple,
    tol: float,
    underflow_floor: float,
) -> ConditionReport:
    viol_nondec = []
    viol_noninc = []
    skipped = []
    for t in t_grid:
        pts = []
        for s in s_grid:
            num = float(model.cond_pdf(component, t, s))
            den = float(model.cond_cdf(component, t, s))
            if num < underflow_floor or den < underflow_floor:
                skipped.append((math.nan, t, s))
                continue
            pts.append((s, num / den))
        nd, ni = _scan_pairs(pts, tol)
        viol_nondec.extend(RatioViolation(math.nan, t, *v) for v in nd)
        viol_noninc.extend(RatioViolation(math.nan, t, *v) for v in ni)

    if not viol_nondec and viol_noninc:
        direction, degenerate = "non-decreasing", False
    elif viol_nondec and not viol_noninc:
        direction, degenerate = "non-increasing", False
    elif not viol_nondec and not viol_noninc:
        direction, degenerate = "indeterminate", True
    else:
        direction, degenerate = "indeterminate", False

    return ConditionReport(
        kernel_level="hazard",
        component=component,
        direction=direction,
        degenerate=degenerate,
        delta_grid=(),
        t_grid=tuple(t_grid),
        s_grid=tuple(s_grid),
        violations_non_decreasing=tuple(viol_nondec),
        violations_non_increasing=tuple(viol_noninc),
        skipped=tuple(skipped),
        tolerance=tol,
    )


def check_lemma_implications(
    pdf_report: ConditionReport,
    model: BivariateModel,
    component: int,
    tol: Optional[float] = None,
    underflow_floor: float = DEFAULT_UNDERFLOW_FLOOR,
) -> LemmaImplicationReport:
    """Verify the two consequences a monotone pdf ratio must propagate.

    The cdf-level ratio inherits the pdf ratio's direction, and the hazard
    ratio h/H moves the opposite way in s.  Reuses the grids of the supplied
    pdf-level report.
    """
    tol = pdf_report.tolerance if tol is None else tol
    cdf_report = check_ratio_monotone(
        model,
        component,
        level="cdf",
        delta_grid=pdf_report.delta_grid,
        t_grid=pdf_report.t_grid,
        s_grid=pdf_report.s_grid,
        tol=tol,
        underflow_floor=underflow_floor,
    )
    hazard_report = _check_hazard_monotone(
        model, component, pdf_report.t_grid, pdf_report.s_grid, tol, underflow_floor
    )
    opposite = {"non-decreasing": "non-increasing", "non-increasing": "non-decreasing"}
    matches = (
        pdf_report.direction != "indeterminate"
        and cdf_report.direction == pdf_report.direction
    )
    hazard_opposite = (
        pdf_report.direction in opposite
        and hazard_report.direction == opposite[pdf_report.direction]
    )
    return LemmaImplicationReport(
        pdf=pdf_report,
        cdf=cdf_report,
        hazard=hazard_report,
        cdf_direction_matches=matches,
        hazard_direction_opposite=hazard_opposite,
    )


def required_sign(direction: str) -> int:
    """Sign the theorem's integral test must keep under a declared ratio direction."""
    if direction == "non-decreasing":
        return +1
    if direction == "non-increasing":
        return -1
    raise DirectionUnknownError(f"no sign requirement for direction {direction!r}")


def required_psi_monotonicity(orientation: Orientation, direction: str) -> str:
    """How psi must vary with t for the dominance theorem to apply."""
    opposite = {"non-decreasing": "non-increasing", "non-increasing": "non-decreasing"}
    if direction not in opposite:
        raise DirectionUnknownError(f"no monotonicity requirement for direction {direction!r}")
    if Orientation(orientation) is Orientation.LOCATION:
        return opposite[direction]
    return direction


def check_theorem_hypothesis(
    model: BivariateModel,
    component: int,
    loss: LossSpec,
    psi,
    t_grid: Optional[tuple] = None,
    tol: float = 1e-6,
    limit_tol: float = 1e-3,
    direction: Optional[str] = None,
) -> TheoremHypothesisReport:
    """Test a candidate psi against the dominance theorem's hypotheses.

    Three checks: the integral of W'(. - psi(t)) (or s W'(psi(t) s) for
    scale) against the conditional-cdf kernel keeps the required sign at
    every grid t, psi is monotone the required way, and psi at the largest
    grid t has come back to c0 within ``limit_tol``.
    """
    model._check_component(component)
    if direction is None:
        direction = default_direction(model, component)
    if direction is None:
        raise DirectionUnknownError(
            "density-ratio direction unknown; run check_ratio_monotone and pass it in"
        )
    sign = required_sign(direction)
    mono = required_psi_monotonicity(model.orientation, direction)
    ts = tuple(default_t_grid(model)) if t_grid is None else tuple(sorted(t_grid))

    eq: KernelEquation = kernel_equation(model, component, loss, "cdf")
    c0 = best_equivariant_constant(model, component, loss)

    psi_vals = [float(np.asarray(psi(t), dtype=float)) for t in ts]

    sign_values = []
    sign_violations = []
    for t, p in zip(ts, psi_vals):
        mass = eq.normalizer(t)
        if not mass > 0.0:
            continue
        val = eq(p, t, abs_tol=max(mass * 1e-10, 1e-300))
        sign_values.append((t, val))
        if sign * val < -tol * mass:
            sign_violations.append((t, val))

    mono_violations = []
    for (t0, p0), (t1, p1) in zip(zip(ts, psi_vals), zip(ts[1:], psi_vals[1:])):
        slack = tol * max(1.0, abs(p0), abs(p1))
        if mono == "non-increasing" and p1 > p0 + slack:
            mono_violations.append((t0, t1, p0, p1))
        if mono == "non-decreasing" and p1 < p0 - slack:
            mono_violations.append((t0, t1, p0, p1))

    limit_t = ts[-1]
    limit_value = psi_vals[-1]
    limit_ok = abs(limit_value - c0) <= limit_tol * max(1.0, abs(c0))

    return TheoremHypothesisReport(
        component=component,
        direction=direction,
        required_sign=sign,
        required_psi_monotonicity=mono,
        t_grid=ts,
        sign_values=tuple(sign_values),
        sign_violations=tuple(sign_violations),
        monotonicity_violations=tuple(mono_violations),
        c0=c0,
        limit_t=limit_t,
        limit_value=limit_value,
        limit_ok=limit_ok,
    )
