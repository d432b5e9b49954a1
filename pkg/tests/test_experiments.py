"""Tests for the experiment runner, CSV schemas and oracle suites."""

import numpy as np
import pandas as pd
import pytest

from src.config import settings
from src.experiments import (
    SWEEP_COLUMNS,
    TRACE_COLUMNS,
    estimate_run,
    load_bundled_scenario,
    run_sweep,
    run_trace,
    run_verify,
    score_run,
)
from src.models import Method, ScenarioConfig, SuiteResult
from src.simulation import RngSpec, simulate_run
from src.utils import export_to_csv

SWEEP_HEADER = (
    "r_E,mse_iKF,se_iKF,mse_iFLS,se_iFLS,mse_KF,se_KF,mse_FLS,se_FLS,"
    "mse_TFLIS_F,se_TFLIS_F,mse_TFLIS_S,se_TFLIS_S"
)
TRACE_HEADER = "k,se_iKF,se_iFLS,se_KF,se_FLS,se_TFLIS_F,se_TFLIS_S"


def test_csv_columns_match_schema():
    assert ",".join(SWEEP_COLUMNS) == SWEEP_HEADER
    assert ",".join(TRACE_COLUMNS) == TRACE_HEADER


def test_estimates_are_aligned_by_time(small_config):
    """Test filtered estimates cover every step and smoothed ones stop L steps early."""
    realization = simulate_run(small_config.state_space(), 2, 1e-3, RngSpec(1), 12)
    estimates = estimate_run(small_config, realization, 1e-3)
    assert set(estimates) == set(Method)
    for method, values in estimates.items():
        assert values.shape == (12, 2)
        if method.is_smoothing:
            assert np.all(np.isfinite(values[:10]))
            assert np.all(np.isnan(values[10:]))
        else:
            assert np.all(np.isfinite(values))


def test_score_run_lengths(small_config):
    scores = score_run(small_config, 1e-3, 0)
    assert set(scores) == {m.value for m in Method}
    assert all(series.shape == (10,) for series in scores.values())
    assert all(np.all(series >= 0) for series in scores.values())


def test_sweep_rows_and_unrequested_methods(small_config):
    """Test one row per r_E and NaN for methods that were not requested."""
    config = small_config.model_copy(update={"methods": [Method.IKF, Method.TFLIS_F]})
    frame = run_sweep(config)
    assert list(frame.columns) == SWEEP_COLUMNS
    assert len(frame) == 2
    np.testing.assert_array_equal(frame["r_E"], [1e-4, 1.0])
    assert frame["mse_iKF"].notna().all()
    assert frame["mse_FLS"].isna().all()
    assert frame["se_TFLIS_S"].isna().all()


def test_sweep_is_independent_of_worker_count(small_config):
    """Test results depend on the seed only, not on scheduling."""
    serial = run_sweep(small_config, jobs=1)
    parallel = run_sweep(small_config, jobs=2)
    pd.testing.assert_frame_equal(serial, parallel, check_exact=True)


def test_sweep_csv_is_reproducible(small_config, tmp_path):
    """Test identical config and seed give byte-identical CSV files."""
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    export_to_csv(run_sweep(small_config, jobs=1), str(first))
    export_to_csv(run_sweep(small_config, jobs=2), str(second))
    assert first.read_bytes() == second.read_bytes()

    lines = first.read_text().splitlines()
    assert lines[0] == SWEEP_HEADER
    assert len(lines) == 3
    assert lines[1].startswith("0.0001,")


def test_sweep_with_position_only_output(small_config):
    """Test a single-output model under the wide prior runs through every method."""
    data = small_config.model_dump()
    data["model"].update(C=[[1.0, 0.0]], R=[[1e-3]])
    data.update(sigma0=[0.0], horizon=20, r_E_grid=[1e-6, 1e-3, 1.0])
    config = ScenarioConfig.model_validate(data)

    frame = run_sweep(config, jobs=1)
    assert list(frame.columns) == SWEEP_COLUMNS
    assert len(frame) == 3
    assert np.all(np.isfinite(frame.drop(columns="r_E").to_numpy()))


def test_seed_changes_results(small_config):
    other = small_config.model_copy(update={"master_seed": 100})
    assert not run_sweep(small_config).equals(run_sweep(other))


def test_trace_rows(small_config, tmp_path):
    """Test the trace has one row per scored step, k = 1..horizon-L."""
    config = small_config.model_copy(update={"methods": [Method.IKF]})
    frame = run_trace(config, 1e-3)
    assert list(frame.columns) == TRACE_COLUMNS
    assert frame["k"].tolist() == list(range(1, 11))
    assert frame["se_iKF"].notna().all()
    assert frame["se_TFLIS_F"].isna().all()

    path = tmp_path / "trace.csv"
    export_to_csv(frame, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == TRACE_HEADER
    assert lines[1].startswith("1,")
    assert lines[1].endswith(",,,,,")


def test_trace_rejects_bad_r_e(small_config):
    with pytest.raises(ValueError):
        run_trace(small_config, 0.0)


def test_progress_callback_counts_runs(small_config):
    ticks = []
    run_sweep(small_config, on_progress=ticks.append)
    assert sum(ticks) == small_config.runs * len(small_config.r_E_grid)


def test_verify_suites_pass(monkeypatch):
    """Test every oracle suite passes on the shipped estimators."""
    monkeypatch.setattr(settings, "verify_instances", 50)
    report = run_verify()
    failed = [suite for suite in report.suites if not suite.passed]
    assert not failed, failed
    assert {suite.name for suite in report.suites} == {
        "sdu_batch_equivalence",
        "window_joint",
        "kf_degeneration",
        "marginal_consistency",
        "prbs_period",
        "transfer_identities",
    }


def test_verify_reports_raising_suites():
    """Test a suite that raises becomes a failed entry instead of an exception."""

    def broken() -> SuiteResult:
        raise RuntimeError("boom")

    report = run_verify({"broken": broken, "fine": lambda: SuiteResult(name="fine", passed=True)})
    assert not report.passed
    assert report.suites[0].detail == "RuntimeError: boom"
    assert report.suites[1].passed


# =============================================================================
# DESK-SCALE MONTE CARLO CHECKS
# =============================================================================


@pytest.fixture(scope="module")
def desk_sweep():
    config = load_bundled_scenario().model_copy(update={"runs": 400})
    return run_sweep(config, jobs=settings.resolve_jobs())


@pytest.mark.slow
def test_smoothing_dominates_filtering(desk_sweep):
    for _, row in desk_sweep.iterrows():
        assert row["mse_FLS"] <= 1.02 * row["mse_KF"]
        assert row["mse_iFLS"] <= 1.02 * row["mse_iKF"]
        assert row["mse_TFLIS_S"] <= row["mse_TFLIS_F"]


@pytest.mark.slow
def test_precise_external_data_transfers(desk_sweep):
    """Test positive transfer when the external data are precise."""
    for _, row in desk_sweep[desk_sweep["r_E"] <= 1e-3].iterrows():
        assert row["mse_KF"] <= row["mse_TFLIS_F"] <= row["mse_iKF"]
        assert row["mse_TFLIS_F"] <= 0.8 * row["mse_iKF"]


@pytest.mark.slow
def test_imprecise_external_data_is_harmless(desk_sweep):
    """Test bounded negative transfer when the external data are poor."""
    row = desk_sweep[desk_sweep["r_E"] == 1.0].iloc[0]
    assert row["mse_TFLIS_F"] <= 1.15 * row["mse_iKF"]
    assert row["mse_TFLIS_S"] <= 1.15 * row["mse_iFLS"]


@pytest.mark.slow
def test_transfer_error_settles_over_time():
    """Test the TFLIS-F error decays toward the exact filter at r_E = 1e-3."""
    config = load_bundled_scenario().model_copy(update={"runs": 400})
    frame = run_trace(config, 1e-3, jobs=settings.resolve_jobs()).set_index("k")
    late = frame.loc[30:48]
    early = frame.loc[3:8]
    assert late["se_TFLIS_F"].mean() < early["se_TFLIS_F"].mean()
    assert late["se_TFLIS_F"].mean() <= 1.5 * late["se_KF"].mean()
