"""End-to-end command-line behavior through main(argv)."""

import csv

import numpy as np
import pytest

from restrict_est.cli import main, read_pairs
from restrict_est.config import (
    RunConfig,
    effective_config_text,
    load_config,
    parse_config_text,
    resolve,
)
from restrict_est.errors import ConfigError, DataError
from restrict_est.models import Orientation

NORMAL_CFG = """\
# independent standard pair
model = normal
sigma1 = 1.0
sigma2 = 1.0
rho = 0.0         # inline comments are allowed
component = 1
replications = 300
seed = 11
grid_points = 4
"""

GAMMA_CFG = """\
model = cr-gamma
component = 1
replications = 300
seed = 11
grid_points = 4
"""


@pytest.fixture()
def normal_cfg(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text(NORMAL_CFG)
    return path


@pytest.fixture()
def gamma_cfg(tmp_path):
    path = tmp_path / "gamma.txt"
    path.write_text(GAMMA_CFG)
    return path


def _write_data(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


# ---------------------------------------------------------------------------
# config parsing


def test_config_round_trip(normal_cfg):
    cfg = load_config(normal_cfg)
    text = effective_config_text(cfg)
    again = resolve(parse_config_text(text))
    assert again == cfg
    assert cfg.lambda_max == pytest.approx(5.0 * np.sqrt(2.0))
    assert cfg.base_theta1 == 0.0


def test_config_rejects_unknown_and_duplicate_keys():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config_text("model = normal\nwibble = 3\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("seed = 1\nseed = 2\n")
    with pytest.raises(ConfigError, match="integer"):
        parse_config_text("seed = 1.5\n")
    with pytest.raises(ConfigError, match="key = value"):
        parse_config_text("seed: 4\n")
    with pytest.raises(ConfigError, match="component"):
        parse_config_text("component = 3\n")
    with pytest.raises(ConfigError, match="loss"):
        parse_config_text("loss = hinge\n")
    with pytest.raises(ConfigError, match="at least 100"):
        parse_config_text("replications = 50\n")


def test_seed_env_override(normal_cfg, monkeypatch):
    monkeypatch.setenv("RESTRICT_EST_SEED", "4242")
    assert load_config(normal_cfg).seed == 4242
    monkeypatch.setenv("RESTRICT_EST_SEED", "pi")
    with pytest.raises(ConfigError):
        load_config(normal_cfg)


def test_scale_defaults():
    cfg = resolve(parse_config_text(GAMMA_CFG))
    assert cfg.lambda_max == 20.0
    assert cfg.base_theta1 == 1.0


# ---------------------------------------------------------------------------
# data reading


def test_read_pairs_happy_path(tmp_path):
    path = _write_data(tmp_path, "x2, x1\n3.0, 5.0\n1.5, 0.0\n")
    assert read_pairs(path, Orientation.LOCATION) == [(5.0, 3.0), (0.0, 1.5)]


def test_read_pairs_errors(tmp_path):
    with pytest.raises(DataError, match="header"):
        read_pairs(_write_data(tmp_path, "a,b\n1,2\n"), Orientation.LOCATION)
    with pytest.raises(DataError, match="empty"):
        read_pairs(_write_data(tmp_path, ""), Orientation.LOCATION)
    with pytest.raises(DataError, match="no data rows"):
        read_pairs(_write_data(tmp_path, "x1,x2\n"), Orientation.LOCATION)
    with pytest.raises(DataError, match=":3:"):
        read_pairs(_write_data(tmp_path, "x1,x2\n1,2\nfoo,2\n"), Orientation.LOCATION)
    with pytest.raises(DataError, match=":2:"):
        read_pairs(_write_data(tmp_path, "x1,x2\nnan,2\n"), Orientation.LOCATION)
    with pytest.raises(DataError, match="positive"):
        read_pairs(_write_data(tmp_path, "x1,x2\n-1.0,2\n"), Orientation.SCALE)
    assert read_pairs(_write_data(tmp_path, "x1,x2\n-1.0,2\n"), Orientation.LOCATION) == [(-1.0, 2.0)]


# ---------------------------------------------------------------------------
# estimate


def test_estimate_command(tmp_path, normal_cfg, capsys):
    data = _write_data(tmp_path, "x1,x2\n5.0,3.0\n0.0,1.5\n")
    out = tmp_path / "out"
    rc = main(["estimate", "--config", str(normal_cfg), "--data", str(data), "--out-dir", str(out)])
    assert rc == 0
    with open(out / "estimates.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    # x1 > x2 forces the clamp to the order-respecting value (5+3)/2 = 4
    assert float(rows[0]["stein_clamped"]) == pytest.approx(4.0, abs=1e-12)
    assert float(rows[0]["best_equivariant"]) == 5.0
    assert rows[0]["note"] == "x1 > x2"
    assert rows[1]["note"] == ""
    assert (out / "effective_config.txt").exists()


def test_estimate_bad_data_exit_code(tmp_path, normal_cfg, capsys):
    data = _write_data(tmp_path, "x1,x2\n1,zap\n")
    rc = main(["estimate", "--config", str(normal_cfg), "--data", str(data), "--out-dir", str(tmp_path / "o")])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_missing_config_exit_code(tmp_path, capsys):
    rc = main(["estimate", "--config", str(tmp_path / "nope.txt"), "--data", str(tmp_path / "d.csv")])
    assert rc == 1


def test_usage_error_exit_code(capsys):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert "error" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# psi-table


def test_psi_table_command(tmp_path, gamma_cfg):
    out = tmp_path / "out"
    rc = main(
        ["psi-table", "--config", str(gamma_cfg), "--t-min", "0.5", "--t-max", "2.0",
         "--points", "4", "--out-dir", str(out)]
    )
    assert rc == 0
    with open(out / "psi_table.csv", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    assert header == ["t", "psi_bz", "psi_stein", "psi_stein_clamped", "c0"]
    assert len(rows) == 4
    t0 = [float(v) for v in rows[0]]
    assert t0[0] == 0.5
    assert t0[1] == pytest.approx(12.0 / 43.0, rel=1e-12)
    assert t0[2] == pytest.approx(19.0 / 65.0, rel=1e-12)
    assert t0[4] == pytest.approx(1.0 / 3.0, rel=1e-15)


def test_psi_table_validates_grid(tmp_path, gamma_cfg, capsys):
    rc = main(["psi-table", "--config", str(gamma_cfg), "--t-min", "-1.0", "--out-dir", str(tmp_path / "o")])
    assert rc == 1
    rc = main(["psi-table", "--config", str(gamma_cfg), "--t-min", "3.0", "--t-max", "1.0", "--out-dir", str(tmp_path / "o")])
    assert rc == 1


def test_psi_table_degenerate_model(tmp_path):
    cfg = tmp_path / "degen.txt"
    cfg.write_text("model = normal\nsigma1 = 0.5\nsigma2 = 1.0\nrho = 0.5\ncomponent = 1\n")
    out = tmp_path / "out"
    rc = main(["psi-table", "--config", str(cfg), "--points", "5", "--out-dir", str(out)])
    assert rc == 0
    with open(out / "psi_table.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert all(float(r["psi_stein_clamped"]) == 0.0 for r in rows)


# ---------------------------------------------------------------------------
# risk-sim


def test_risk_sim_outputs_and_determinism(tmp_path, normal_cfg):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["risk-sim", "--config", str(normal_cfg), "--svg", "--out-dir", str(out1)]) == 0
    assert main(["risk-sim", "--config", str(normal_cfg), "--svg", "--out-dir", str(out2)]) == 0
    csv1 = (out1 / "risk_sim.csv").read_bytes()
    csv2 = (out2 / "risk_sim.csv").read_bytes()
    assert csv1 == csv2
    svg1 = (out1 / "risk_sim.svg").read_bytes()
    svg2 = (out2 / "risk_sim.svg").read_bytes()
    assert svg1 == svg2
    assert svg1.startswith(b"<?xml")
    with open(out1 / "risk_sim.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    # 4 lambda points x 3 standard estimators
    assert len(rows) == 12
    assert {r["estimator"] for r in rows} == {"best-equivariant", "brewster-zidek", "stein-clamped"}
    assert all(int(r["n"]) == 300 for r in rows)


def test_risk_sim_seed_env_changes_output(tmp_path, normal_cfg, monkeypatch):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["risk-sim", "--config", str(normal_cfg), "--out-dir", str(out1)]) == 0
    monkeypatch.setenv("RESTRICT_EST_SEED", "999")
    assert main(["risk-sim", "--config", str(normal_cfg), "--out-dir", str(out2)]) == 0
    assert (out1 / "risk_sim.csv").read_bytes() != (out2 / "risk_sim.csv").read_bytes()
    assert "seed = 999" in (out2 / "effective_config.txt").read_text()


def test_risk_sim_gamma(tmp_path, gamma_cfg, capsys):
    out = tmp_path / "out"
    assert main(["risk-sim", "--config", str(gamma_cfg), "--out-dir", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "no estimator flagged" in stdout


# ---------------------------------------------------------------------------
# verify-conditions


def test_verify_conditions_command(tmp_path, gamma_cfg, capsys):
    out = tmp_path / "out"
    rc = main(["verify-conditions", "--config", str(gamma_cfg), "--out-dir", str(out)])
    assert rc == 0
    report = (out / "conditions_report.txt").read_text()
    assert "direction = non-decreasing" in report
    assert "hypothesis satisfied = True" in report
    violations = (out / "condition_violations.csv").read_text().splitlines()
    assert violations[0].startswith("check,hypothesis")
    stdout = capsys.readouterr().out
    assert "non-decreasing" in stdout


def test_verify_conditions_degenerate(tmp_path, capsys):
    cfg = tmp_path / "degen.txt"
    cfg.write_text("model = normal\nsigma1 = 0.5\nsigma2 = 1.0\nrho = 0.5\ncomponent = 1\n")
    out = tmp_path / "out"
    rc = main(["verify-conditions", "--config", str(cfg), "--out-dir", str(out)])
    assert rc == 0
    report = (out / "conditions_report.txt").read_text()
    assert "degenerate = True" in report
    assert "(degenerate)" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# selfcheck


def test_selfcheck_passes(capsys):
    assert main(["selfcheck"]) == 0
    out = capsys.readouterr().out
    assert "all 8 checks passed" in out
    assert out.count("PASS") == 8


def test_selfcheck_near_degenerate_model(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("model = normal\nsigma1 = 1.0\nsigma2 = 1.0\nrho = 0.999999\n")
    assert main(["selfcheck", "--config", str(cfg)]) == 0


def test_selfcheck_loose_tolerance_still_passes(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("agreement_tol = 0.1\n")
    assert main(["selfcheck", "--config", str(cfg)]) == 0


def test_selfcheck_impossible_tolerance_fails(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("agreement_tol = 1e-18\n")
    assert main(["selfcheck", "--config", str(cfg)]) == 3
    out = capsys.readouterr().out
    assert "FAIL" in out
