"""Tests for the command-line interface."""

import json

import pytest
from typer.testing import CliRunner

from main import app
from src.experiments import load_bundled_scenario
from src.models import SuiteResult, VerifyReport

runner = CliRunner()


@pytest.fixture
def scenario_file(tmp_path):
    """Small scenario written to disk."""
    config = load_bundled_scenario().model_copy(
        update={"runs": 2, "horizon": 8, "r_E_grid": [1e-3], "master_seed": 5}
    )
    path = tmp_path / "scenario.json"
    path.write_text(config.model_dump_json(indent=2))
    return path


def test_sweep_writes_csv(scenario_file, tmp_path):
    out = tmp_path / "sweep.csv"
    result = runner.invoke(app, ["sweep", "--config", str(scenario_file), "--out", str(out), "--jobs", "1"])
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[0].startswith("r_E,mse_iKF,se_iKF")
    assert len(lines) == 2


def test_sweep_is_deterministic(scenario_file, tmp_path):
    """Test repeated sweeps with the same seed give identical bytes across --jobs."""
    outputs = []
    for jobs in ("1", "2"):
        out = tmp_path / f"sweep_{jobs}.csv"
        result = runner.invoke(
            app, ["sweep", "-c", str(scenario_file), "-o", str(out), "-j", jobs]
        )
        assert result.exit_code == 0, result.output
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_seed_and_runs_overrides(scenario_file, tmp_path):
    base = tmp_path / "base.csv"
    other = tmp_path / "other.csv"
    runner.invoke(app, ["sweep", "-c", str(scenario_file), "-o", str(base), "-j", "1"])
    result = runner.invoke(
        app,
        ["sweep", "-c", str(scenario_file), "-o", str(other), "-j", "1", "--seed", "6", "--runs", "3"],
    )
    assert result.exit_code == 0, result.output
    assert base.read_text() != other.read_text()


def test_trace_writes_rows(scenario_file, tmp_path):
    out = tmp_path / "trace.csv"
    result = runner.invoke(
        app, ["trace", "-c", str(scenario_file), "--r-e", "1e-3", "-o", str(out), "-j", "1"]
    )
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[0] == "k,se_iKF,se_iFLS,se_KF,se_FLS,se_TFLIS_F,se_TFLIS_S"
    assert len(lines) == 1 + 6


def test_invalid_scenario_exits_with_status_one(scenario_file, tmp_path):
    """Test a zero r_E is rejected before anything is written."""
    data = json.loads(scenario_file.read_text())
    data["r_E_grid"] = [0.0, 1e-3]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    out = tmp_path / "never.csv"

    result = runner.invoke(app, ["sweep", "-c", str(bad), "-o", str(out)])
    assert result.exit_code == 1
    assert "r_E_grid" in result.output
    assert not out.exists()


def test_missing_scenario_exits_with_status_one(tmp_path):
    result = runner.invoke(app, ["sweep", "-c", str(tmp_path / "missing.json")])
    assert result.exit_code == 1


def test_invalid_jobs_exits_with_status_one(scenario_file):
    result = runner.invoke(app, ["sweep", "-c", str(scenario_file), "-j", "0"])
    assert result.exit_code == 1


def test_verify_prints_json_report(monkeypatch):
    passing = VerifyReport(suites=[SuiteResult(name="prbs_period", passed=True, checks=15)])
    monkeypatch.setattr("main.run_verify", lambda: passing)
    result = runner.invoke(app, ["verify"])
    assert result.exit_code == 0
    assert '"passed": true' in result.output


def test_verify_failure_exits_with_status_two(monkeypatch):
    failing = VerifyReport(suites=[SuiteResult(name="window_joint", passed=False)])
    monkeypatch.setattr("main.run_verify", lambda: failing)
    result = runner.invoke(app, ["verify"])
    assert result.exit_code == 2


def test_show_displays_bundled_scenario():
    result = runner.invoke(app, ["show", "-j", "1"])
    assert result.exit_code == 0
