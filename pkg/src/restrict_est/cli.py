"""Command-line interface.

Subcommands:

``estimate``            apply the improved estimators to observed pairs
``psi-table``           tabulate the adjustment functions on a grid
``risk-sim``            Monte Carlo risk curves (CSV, optional SVG figure)
``verify-conditions``   numeric certificate for the monotonicity conditions
``selfcheck``           fast internal consistency battery

Exit codes: 0 success, 1 usage/config/data error, 2 numeric failure,
3 selfcheck failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    RunConfig,
    build_loss,
    build_model,
    default_config,
    effective_config_text,
    load_config,
    orientation_of,
)
from .conditions import (
    check_lemma_implications,
    check_ratio_monotone,
    check_theorem_hypothesis,
)
from .errors import (
    ConfigError,
    DataError,
    NumericsError,
    RestrictEstError,
)
from .estimators import (
    best_equivariant_constant,
    evaluate,
    make_best_equivariant,
    make_brewster_zidek,
    make_stein_clamped,
)
from .models import Orientation, cr_gamma_model, normal_model, NormalSpec
from .loss import squared_error_location, squared_error_scale
from .plots import risk_curve_figure, save_figure_svg
from .risksim import SimPlan, dominance_report, simulate, write_risk_csv


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of calling sys.exit, so main() owns codes."""

    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="restrict-est", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"restrict-est {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, config_required=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=config_required, help="path to a key = value config file")
        p.add_argument("--out-dir", default="out", help="directory for output files (default: out)")
        return p

    p = add("estimate", "estimate both components for observed (x1, x2) pairs")
    p.add_argument("--data", required=True, help="CSV file with columns x1, x2")

    p = add("psi-table", "tabulate adjustment functions against the difference statistic")
    p.add_argument("--t-min", type=float, default=None, help="grid lower end")
    p.add_argument("--t-max", type=float, default=None, help="grid upper end")
    p.add_argument("--points", type=int, default=101, help="grid size (default: 101)")

    p = add("risk-sim", "simulate risk curves for the standard estimators")
    p.add_argument("--svg", action="store_true", help="also render the curves to risk_sim.svg")

    add("verify-conditions", "check the ratio ordering conditions and report the direction")

    add("selfcheck", "run the internal consistency battery", config_required=False)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"restrict-est: error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "psi-table":
            return _cmd_psi_table(args)
        if args.command == "risk-sim":
            return _cmd_risk_sim(args)
        if args.command == "verify-conditions":
            return _cmd_verify_conditions(args)
        return _cmd_selfcheck(args)
    except (ConfigError, DataError, _UsageError) as exc:
        print(f"restrict-est: error: {exc}", file=sys.stderr)
        return 1
    except RestrictEstError as exc:
        print(f"restrict-est: numeric failure: {exc}", file=sys.stderr)
        return 2


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_effective_config(config: RunConfig, out: Path) -> Path:
    path = out / "effective_config.txt"
    path.write_text(effective_config_text(config))
    return path


def _fmt(value: float) -> str:
    return repr(float(value))


# ---------------------------------------------------------------------------
# estimate


def read_pairs(path, orientation: Orientation):
    """Read (x1, x2) rows from a CSV file with a header naming both columns."""
    try:
        with open(path, "r", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: file is empty")
            names = [h.strip() for h in header]
            if "x1" not in names or "x2" not in names:
                raise DataError(f"{path}: header must name columns x1 and x2, got {header}")
            i1, i2 = names.index("x1"), names.index("x2")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) <= max(i1, i2):
                    raise DataError(f"{path}:{lineno}: expected at least {max(i1, i2) + 1} columns")
                try:
                    x1 = float(row[i1])
                    x2 = float(row[i2])
                except ValueError:
                    raise DataError(f"{path}:{lineno}: could not parse x1/x2 as numbers: {row!r}")
                if not (math.isfinite(x1) and math.isfinite(x2)):
                    raise DataError(f"{path}:{lineno}: non-finite value")
                if orientation is Orientation.SCALE and (x1 <= 0.0 or x2 <= 0.0):
                    raise DataError(f"{path}:{lineno}: scale data must be positive, got ({x1}, {x2})")
                rows.append((x1, x2))
    except OSError as exc:
        raise DataError(f"cannot read data file {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows


def run_estimate(config: RunConfig, pairs):
    """Return one output row per observed pair, as a list of dicts."""
    model = build_model(config)
    loss = build_loss(config)
    component = config.component
    estimators = [
        ("best_equivariant", make_best_equivariant(model, component, loss)),
        ("brewster_zidek", make_brewster_zidek(model, component, loss)),
        ("stein_clamped", make_stein_clamped(model, component, loss)),
    ]
    x1 = np.array([p[0] for p in pairs], dtype=float)
    x2 = np.array([p[1] for p in pairs], dtype=float)
    if model.orientation is Orientation.LOCATION:
        d = x2 - x1
    else:
        d = x2 / x1
    columns = {name: evaluate(est, x1, x2) for name, est in estimators}
    rows = []
    for k in range(len(pairs)):
        note = "x1 > x2" if x1[k] > x2[k] else ""
        row = {"x1": x1[k], "x2": x2[k], "d": d[k]}
        for name, _ in estimators:
            row[name] = float(np.asarray(columns[name])[k])
        row["note"] = note
        rows.append(row)
    return rows


def _cmd_estimate(args) -> int:
    config = load_config(args.config)
    pairs = read_pairs(args.data, orientation_of(config))
    rows = run_estimate(config, pairs)
    out = _out_dir(args)
    path = out / "estimates.csv"
    fieldnames = ["x1", "x2", "d", "best_equivariant", "brewster_zidek", "stein_clamped", "note"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in fieldnames[:-1]] + [row["note"]])
    _write_effective_config(config, out)
    print(f"wrote {path} ({len(rows)} rows, component {config.component})")
    return 0


# ---------------------------------------------------------------------------
# psi-table


def _psi_grid(config: RunConfig, model, t_min, t_max, points):
    if points < 2:
        raise ConfigError("--points must be at least 2")
    orientation = model.orientation
    if t_min is None or t_max is None:
        if orientation is Orientation.LOCATION:
            half = 5.0 * model.d_scale()
            lo = -half if t_min is None else t_min
            hi = half if t_max is None else t_max
        else:
            lo = 0.02 if t_min is None else t_min
            hi = 50.0 if t_max is None else t_max
    else:
        lo, hi = t_min, t_max
    if not lo < hi:
        raise ConfigError(f"--t-min must be below --t-max, got [{lo}, {hi}]")
    if orientation is Orientation.SCALE and lo <= 0.0:
        raise ConfigError("--t-min must be positive for scale models")
    return np.linspace(lo, hi, points)


def _cmd_psi_table(args) -> int:
    from .estimators import stein_psi

    config = load_config(args.config)
    model = build_model(config)
    loss = build_loss(config)
    t = _psi_grid(config, model, args.t_min, args.t_max, args.points)
    component = config.component
    best = make_best_equivariant(model, component, loss)
    bz = make_brewster_zidek(model, component, loss)
    clamped = make_stein_clamped(model, component, loss)
    c0 = best.params["c0"]
    table = np.column_stack([t, bz.psi(t), stein_psi(model, component, loss, t), clamped.psi(t)])
    out = _out_dir(args)
    path = out / "psi_table.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "psi_bz", "psi_stein", "psi_stein_clamped", "c0"])
        for row in table:
            writer.writerow([_fmt(v) for v in row] + [_fmt(c0)])
    _write_effective_config(config, out)
    note = f" ({clamped.note})" if clamped.note else ""
    print(f"wrote {path} ({len(t)} points, component {component}{note})")
    return 0


# ---------------------------------------------------------------------------
# risk-sim


def _standard_estimators(model, component, loss):
    return [
        make_best_equivariant(model, component, loss),
        make_brewster_zidek(model, component, loss),
        make_stein_clamped(model, component, loss),
    ]


def _lambda_grid(config: RunConfig, model):
    if model.orientation is Orientation.LOCATION:
        return np.linspace(0.0, config.lambda_max, config.grid_points)
    return np.geomspace(1.0, config.lambda_max, config.grid_points)


def _cmd_risk_sim(args) -> int:
    config = load_config(args.config)
    model = build_model(config)
    loss = build_loss(config)
    estimators = _standard_estimators(model, config.component, loss)
    plan = SimPlan(
        model=model,
        component=config.component,
        loss=loss,
        estimators=estimators,
        lambda_grid=_lambda_grid(config, model),
        replications=config.replications,
        seed=config.seed,
        base_theta1=config.base_theta1,
    )
    curve = simulate(plan)
    out = _out_dir(args)
    csv_path = out / "risk_sim.csv"
    write_risk_csv(curve, csv_path)
    _write_effective_config(config, out)
    made = [str(csv_path)]
    if args.svg:
        fig = risk_curve_figure(curve)
        svg_path = out / "risk_sim.svg"
        save_figure_svg(fig, svg_path)
        made.append(str(svg_path))
    report = dominance_report(curve, baseline=estimators[0].label)
    flagged = [row for row in report.rows if row.flagged]
    print(f"wrote {', '.join(made)}")
    if flagged:
        worst = max(flagged, key=lambda r: r.mean_diff / max(r.std_err_diff, 1e-300))
        print(
            f"dominance check vs {report.baseline}: {len(flagged)} flagged cells "
            f"(worst: {worst.estimator} at lambda={worst.lam:g}, "
            f"mean diff {worst.mean_diff:.3e} > 3 x {worst.std_err_diff:.3e})"
        )
    else:
        print(f"dominance check vs {report.baseline}: no estimator flagged above noise")
    return 0


# ---------------------------------------------------------------------------
# verify-conditions


def _cmd_verify_conditions(args) -> int:
    config = load_config(args.config)
    model = build_model(config)
    loss = build_loss(config)
    component = config.component
    out = _out_dir(args)

    pdf_report = check_ratio_monotone(model, component, level="pdf")
    lines = []
    lines.append(f"model = {model.kind}")
    lines.append(f"component = {component}")
    lines.append(f"orientation = {model.orientation.value}")
    lines.append("")
    lines.append("[pdf ratio ordering]")
    lines.append(f"direction = {pdf_report.direction}")
    lines.append(f"degenerate = {pdf_report.degenerate}")
    lines.append(
        f"grid = {len(pdf_report.delta_grid)} shifts x {len(pdf_report.t_grid)} t "
        f"x {len(pdf_report.s_grid)} s, tolerance = {pdf_report.tolerance:g}"
    )
    lines.append(f"skipped points (underflow) = {len(pdf_report.skipped)}")
    lines.append(
        "violations: non-decreasing "
        f"{len(pdf_report.violations_non_decreasing)}, non-increasing "
        f"{len(pdf_report.violations_non_increasing)}"
    )

    violations = []
    for hyp, rows in (
        ("non-decreasing", pdf_report.violations_non_decreasing),
        ("non-increasing", pdf_report.violations_non_increasing),
    ):
        for v in rows:
            violations.append(("pdf-ratio", hyp, v.delta, v.t, v.s_lo, v.s_hi, v.ratio_lo, v.ratio_hi))

    theorem_ok = None
    if pdf_report.degenerate:
        lines.append("")
        lines.append("ratio is constant on the grid: improvement conditions are degenerate")
        lines.append("(the unrestricted estimator is already best; no direction to certify)")
    elif pdf_report.direction == "indeterminate":
        lines.append("")
        lines.append("no single monotone direction fits the grid; see condition_violations.csv")
    else:
        lemma = check_lemma_implications(pdf_report, model, component)
        lines.append("")
        lines.append("[implied orderings]")
        lines.append(f"cdf ratio direction matches pdf = {lemma.cdf_direction_matches}")
        lines.append(f"hazard ratio direction opposite = {lemma.hazard_direction_opposite}")
        for tag, rep in (("cdf-ratio", lemma.cdf), ("hazard-ratio", lemma.hazard)):
            for hyp, rows in (
                ("non-decreasing", rep.violations_non_decreasing),
                ("non-increasing", rep.violations_non_increasing),
            ):
                for v in rows:
                    violations.append((tag, hyp, v.delta, v.t, v.s_lo, v.s_hi, v.ratio_lo, v.ratio_hi))

        bz = make_brewster_zidek(model, component, loss)
        hyp_report = check_theorem_hypothesis(model, component, loss, bz.psi, direction=pdf_report.direction)
        theorem_ok = hyp_report.ok
        lines.append("")
        lines.append("[improvement hypothesis for the smooth adjusted estimator]")
        lines.append(f"required sign of the kernel equation = {hyp_report.required_sign:+d}")
        lines.append(f"required adjustment monotonicity = {hyp_report.required_psi_monotonicity}")
        lines.append(f"sign violations = {len(hyp_report.sign_violations)}")
        lines.append(f"monotonicity violations = {len(hyp_report.monotonicity_violations)}")
        lines.append(
            f"limit check: psi({hyp_report.limit_t:g}) = {hyp_report.limit_value:.6g}, "
            f"target c0 = {hyp_report.c0:.6g}, ok = {hyp_report.limit_ok}"
        )
        lines.append(f"hypothesis satisfied = {hyp_report.ok}")
        for t_bad, value in hyp_report.sign_violations:
            violations.append(("theorem-sign", pdf_report.direction, math.nan, t_bad, math.nan, math.nan, value, math.nan))
        for t_lo, t_hi, p_lo, p_hi in hyp_report.monotonicity_violations:
            violations.append(("theorem-psi-monotone", pdf_report.direction, math.nan, t_lo, t_hi, math.nan, p_lo, p_hi))

    report_path = out / "conditions_report.txt"
    report_path.write_text("\n".join(lines) + "\n")

    csv_path = out / "condition_violations.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check", "hypothesis", "delta", "t", "s_lo", "s_hi", "value_lo", "value_hi"])
        for row in violations:
            writer.writerow([row[0], row[1]] + [_fmt(x) if isinstance(x, float) else x for x in row[2:]])

    _write_effective_config(config, out)
    print(f"wrote {report_path} and {csv_path}")
    print(f"pdf ratio direction: {pdf_report.direction}" + (" (degenerate)" if pdf_report.degenerate else ""))
    if theorem_ok is not None:
        print(f"improvement hypothesis satisfied: {theorem_ok}")
    return 0


# ---------------------------------------------------------------------------
# selfcheck


def _check(name, fn, results):
    try:
        detail = fn()
        results.append((name, True, detail or "ok"))
    except AssertionError as exc:
        results.append((name, False, str(exc) or "assertion failed"))
    except RestrictEstError as exc:
        results.append((name, False, f"{type(exc).__name__}: {exc}"))


def run_selfcheck(config: RunConfig):
    """Run the consistency battery; returns a list of (name, ok, detail)."""
    from .estimators import bz_psi, stein_psi

    results = []
    tol = config.agreement_tol

    normal = normal_model(NormalSpec(1.0, 2.0, 0.4))
    gamma = cr_gamma_model()
    loc_loss = squared_error_location()
    sc_loss = squared_error_scale()

    def normal_agreement():
        t = np.linspace(-2.0, 2.0, 5)
        worst = 0.0
        for component in (1, 2):
            closed = bz_psi(normal, component, loc_loss, t)
            generic = bz_psi(normal, component, loc_loss, t, method="generic")
            worst = max(worst, float(np.max(np.abs(closed - generic))))
        assert worst <= tol, f"closed vs generic mismatch {worst:.3e} > {tol:g}"
        return f"max |closed - generic| = {worst:.3e}"

    def gamma_agreement():
        t = np.array([0.3, 0.8, 1.0, 1.7, 3.0])
        worst = 0.0
        for component in (1, 2):
            closed = stein_psi(gamma, component, sc_loss, t)
            generic = stein_psi(gamma, component, sc_loss, t, method="generic")
            worst = max(worst, float(np.max(np.abs(closed - generic))))
        assert worst <= tol, f"closed vs generic mismatch {worst:.3e} > {tol:g}"
        return f"max |closed - generic| = {worst:.3e}"

    def branch_continuity():
        eps = 1e-9
        worst = 0.0
        for component in (1, 2):
            for fn in (bz_psi, stein_psi):
                lo = float(fn(gamma, component, sc_loss, 1.0 - eps))
                hi = float(fn(gamma, component, sc_loss, 1.0 + eps))
                worst = max(worst, abs(hi - lo))
        assert worst <= 1e-6, f"branch jump {worst:.3e} at t = 1"
        return f"max jump across t = 1 is {worst:.3e}"

    def sampler_moments():
        n = 20000
        rng_seed = config.seed
        for model, theta, means, variances in (
            (normal, (0.0, 1.0), (0.0, 1.0), (1.0, 4.0)),
            (gamma, (1.0, 2.0), (2.0, 4.0), (2.0, 8.0)),
        ):
            x1, x2 = model.sample(theta[0], theta[1], np.random.default_rng(rng_seed), n)
            for draws, mean, var in ((x1, means[0], variances[0]), (x2, means[1], variances[1])):
                se = math.sqrt(var / n)
                err = abs(float(np.mean(draws)) - mean)
                assert err <= 5.0 * se, f"{model.kind} sample mean off by {err:.3g} (5 SE = {5 * se:.3g})"
        return "sample means within 5 SE for both models"

    def equivariance():
        rng = np.random.default_rng(config.seed + 1)
        worst = 0.0
        for model, loss in ((normal, loc_loss), (gamma, sc_loss)):
            for component in (1, 2):
                est = make_brewster_zidek(model, component, loss)
                if model.orientation is Orientation.LOCATION:
                    x1, x2 = rng.normal(size=50), rng.normal(size=50)
                    shift = rng.normal(size=50)
                    base = np.asarray(evaluate(est, x1, x2))
                    moved = np.asarray(evaluate(est, x1 + shift, x2 + shift))
                    err = np.max(np.abs(moved - (base + shift)) / np.maximum(1.0, np.abs(moved)))
                else:
                    x1, x2 = rng.gamma(2.0, size=50) + 0.05, rng.gamma(2.0, size=50) + 0.05
                    scale = rng.gamma(2.0, size=50) + 0.05
                    base = np.asarray(evaluate(est, x1, x2))
                    moved = np.asarray(evaluate(est, scale * x1, scale * x2))
                    err = np.max(np.abs(moved - scale * base) / np.maximum(1e-12, np.abs(moved)))
                worst = max(worst, float(err))
        assert worst <= 1e-12, f"equivariance error {worst:.3e}"
        return f"max relative equivariance error = {worst:.3e}"

    def best_constants():
        c_loc = best_equivariant_constant(normal, 1, loc_loss, method="generic")
        c_sc = best_equivariant_constant(gamma, 1, sc_loss, method="generic")
        assert abs(c_loc) <= 1e-8, f"location constant {c_loc!r} not 0"
        assert abs(c_sc - 1.0 / 3.0) <= 1e-8, f"scale constant {c_sc!r} not 1/3"
        return f"constants: {c_loc:.2e} and |{c_sc:.10f} - 1/3| = {abs(c_sc - 1 / 3):.2e}"

    def config_psi_finite():
        # Exercise the configured model itself, not just the fixed ones:
        # near-degenerate parameter choices must not overflow the closed
        # forms or the clamp logic.
        model = build_model(config)
        loss = build_loss(config)
        component = config.component
        if model.orientation is Orientation.LOCATION:
            half = 5.0 * model.d_scale()
            grid = np.linspace(-half, half, 9)
        else:
            grid = np.geomspace(0.02, 50.0, 9)
        pieces = [np.atleast_1d(float(best_equivariant_constant(model, component, loss)))]
        for make in (make_best_equivariant, make_brewster_zidek, make_stein_clamped):
            est = make(model, component, loss)
            pieces.append(np.asarray(est.psi(grid), dtype=float))
        flat = np.concatenate(pieces)
        assert np.all(np.isfinite(flat)), "non-finite psi value on the configured model"
        return f"{model.kind} component {component}: psi finite on a {grid.size}-point grid"

    def risk_determinism():
        plan = SimPlan(
            model=normal,
            component=1,
            loss=loc_loss,
            estimators=[make_best_equivariant(normal, 1, loc_loss)],
            lambda_grid=np.array([0.0, 1.0, 3.0]),
            replications=400,
            seed=config.seed,
        )
        a = simulate(plan, workers=1)
        b = simulate(plan, workers=3)
        assert np.array_equal(a.mean_risk, b.mean_risk), "risk depends on worker count"
        return "serial and 3-worker runs byte-identical"

    _check("config-psi-finite", config_psi_finite, results)
    _check("normal-psi-agreement", normal_agreement, results)
    _check("cr-gamma-psi-agreement", gamma_agreement, results)
    _check("branch-continuity", branch_continuity, results)
    _check("sampler-moments", sampler_moments, results)
    _check("equivariance", equivariance, results)
    _check("best-constants", best_constants, results)
    _check("risk-determinism", risk_determinism, results)
    return results


def _cmd_selfcheck(args) -> int:
    config = load_config(args.config) if args.config else default_config()
    results = run_selfcheck(config)
    width = max(len(name) for name, _, _ in results)
    failures = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        print(f"{name:<{width}}  {status}  {detail}")
        failures += 0 if ok else 1
    if failures:
        print(f"selfcheck: {failures} of {len(results)} checks failed")
        return 3
    print(f"selfcheck: all {len(results)} checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
