"""Monte Carlo risk curves under common random numbers.

Each grid point lambda gets its own deterministic RNG stream derived from
(seed, grid index), so results do not depend on evaluation order or worker
count.  All estimators at one grid point see the same draws, which makes
paired risk differences far tighter than independent comparisons.  Losses
are evaluated pivotally (the base parameter cancels algebraically before
any floating-point subtraction), so changing ``base_theta1`` cannot change
a single simulated loss value.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import PlanError
from .estimators import EquivariantEstimator
from .loss import LossSpec
from .models import BivariateModel, Orientation


@dataclass(frozen=True)
class SimPlan:
    """Everything a risk sweep needs; validated at construction."""

    model: BivariateModel
    component: int
    loss: LossSpec
    estimators: tuple
    lambda_grid: tuple
    replications: int = 10000
    seed: int = 0
    base_theta1: Optional[float] = None

    def __post_init__(self):
        if self.component not in (1, 2):
            raise PlanError(f"component must be 1 or 2, got {self.component!r}")
        if not self.estimators:
            raise PlanError("plan needs at least one estimator")
        labels = [e.label for e in self.estimators]
        if len(set(labels)) != len(labels):
            raise PlanError(f"estimator labels must be unique, got {labels}")
        for e in self.estimators:
            if not isinstance(e, EquivariantEstimator):
                raise PlanError(f"not an estimator: {e!r}")
            if e.orientation is not self.model.orientation:
                raise PlanError(f"estimator {e.label!r} has the wrong orientation")
            if e.component != self.component:
                raise PlanError(f"estimator {e.label!r} targets component {e.component}")
        grid = tuple(float(x) for x in self.lambda_grid)
        if not grid:
            raise PlanError("lambda grid is empty")
        if any(not math.isfinite(x) for x in grid):
            raise PlanError("lambda grid must be finite")
        if self.model.orientation is Orientation.LOCATION:
            if any(x < 0.0 for x in grid):
                raise PlanError("location separations need lambda >= 0")
            expected_pivot = 0.0
        else:
            if any(x < 1.0 for x in grid):
                raise PlanError("scale separations need lambda >= 1")
            expected_pivot = 1.0
        if self.loss.pivot != expected_pivot:
            raise PlanError(
                f"loss pivot {self.loss.pivot} does not match the model orientation"
            )
        object.__setattr__(self, "lambda_grid", grid)
        if int(self.replications) < 100:
            raise PlanError("replications must be at least 100")
        object.__setattr__(self, "replications", int(self.replications))
        if int(self.seed) < 0:
            raise PlanError("seed must be a non-negative integer")
        object.__setattr__(self, "seed", int(self.seed))
        base = self.base_theta1
        if base is None:
            base = 0.0 if self.model.orientation is Orientation.LOCATION else 1.0
        base = float(base)
        if self.model.orientation is Orientation.SCALE and not base > 0.0:
            raise PlanError("base_theta1 must be positive for scale models")
        object.__setattr__(self, "base_theta1", base)


@dataclass(frozen=True)
class RiskCurve:
    """Simulated risks on a lambda grid; one row block per estimator."""

    lambda_grid: tuple
    labels: tuple
    mean_risk: np.ndarray  # shape (n_estimators, n_lambda)
    std_err: np.ndarray
    replications: int
    seed: int
    base_theta1: float
    model_kind: str
    component: int
    orientation: Orientation
    losses: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass(frozen=True)
class DominanceRow:
    estimator: str
    lam: float
    mean_diff: float
    std_err_diff: float
    flagged: bool


@dataclass(frozen=True)
class DominanceReport:
    baseline: str
    rows: tuple

    @property
    def any_flagged(self) -> bool:
        return any(r.flagged for r in self.rows)

    def rows_for(self, estimator: str) -> tuple:
        return tuple(r for r in self.rows if r.estimator == estimator)


def _rng_for_cell(seed: int, index: int) -> np.random.Generator:
    # Pure function of (seed, index): independent of worker scheduling.
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _simulate_cell(plan: SimPlan, index: int) -> np.ndarray:
    lam = plan.lambda_grid[index]
    rng = _rng_for_cell(plan.seed, index)
    z1, z2 = plan.model.draw_pivot(rng, plan.replications)
    zi = z1 if plan.component == 1 else z2
    out = np.empty((len(plan.estimators), plan.replications))
    if plan.model.orientation is Orientation.LOCATION:
        d = lam + (z2 - z1)
        for k, estimator in enumerate(plan.estimators):
            out[k] = plan.loss.w(zi - np.asarray(estimator.psi(d), dtype=float))
    else:
        d = lam * (z2 / z1)
        for k, estimator in enumerate(plan.estimators):
            out[k] = plan.loss.w(np.asarray(estimator.psi(d), dtype=float) * zi)
    return out


def simulate(plan: SimPlan, workers: int = 1, keep_losses: bool = True) -> RiskCurve:
    """Run the sweep; identical output for any ``workers`` value."""
    n_lam = len(plan.lambda_grid)
    n_est = len(plan.estimators)
    losses = np.empty((n_est, n_lam, plan.replications))
    if workers <= 1:
        cells = (_simulate_cell(plan, j) for j in range(n_lam))
        for j, cell in enumerate(cells):
            losses[:, j, :] = cell
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            for j, cell in enumerate(pool.map(lambda i: _simulate_cell(plan, i), range(n_lam))):
                losses[:, j, :] = cell

    mean_risk = losses.mean(axis=2)
    std_err = losses.std(axis=2, ddof=1) / math.sqrt(plan.replications)
    return RiskCurve(
        lambda_grid=plan.lambda_grid,
        labels=tuple(e.label for e in plan.estimators),
        mean_risk=mean_risk,
        std_err=std_err,
        replications=plan.replications,
        seed=plan.seed,
        base_theta1=plan.base_theta1,
        model_kind=plan.model.kind,
        component=plan.component,
        orientation=plan.model.orientation,
        losses=losses if keep_losses else None,
    )


def dominance_report(curve: RiskCurve, baseline: str) -> DominanceReport:
    """Paired risk differences against a baseline, flagged beyond 3 paired SEs.

    A flagged row means the estimator's simulated risk exceeds the
    baseline's at that lambda by more than three standard errors of the
    paired difference, i.e. evidence against dominance.
    """
    if baseline not in curve.labels:
        raise ValueError(f"baseline {baseline!r} not among {curve.labels}")
    if curve.losses is None:
        raise ValueError("curve was simulated with keep_losses=False; rerun to pair losses")
    b = curve.labels.index(baseline)
    n = curve.replications
    rows = []
    for k, label in enumerate(curve.labels):
        diffs = curve.losses[k] - curve.losses[b]  # (n_lambda, replications)
        mean_diff = diffs.mean(axis=1)
        se_diff = diffs.std(axis=1, ddof=1) / math.sqrt(n)
        for j, lam in enumerate(curve.lambda_grid):
            rows.append(
                DominanceRow(
                    estimator=label,
                    lam=lam,
                    mean_diff=float(mean_diff[j]),
                    std_err_diff=float(se_diff[j]),
                    flagged=bool(mean_diff[j] > 3.0 * se_diff[j]),
                )
            )
    return DominanceReport(baseline=baseline, rows=tuple(rows))


def write_risk_csv(curve: RiskCurve, path) -> None:
    """Write the curve as CSV; full-precision reprs keep the bytes deterministic."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "estimator", "mean_risk", "std_err", "n"])
        for j, lam in enumerate(curve.lambda_grid):
            for k, label in enumerate(curve.labels):
                writer.writerow(
                    [
                        repr(float(lam)),
                        label,
                        repr(float(curve.mean_risk[k, j])),
                        repr(float(curve.std_err[k, j])),
                        curve.replications,
                    ]
                )
