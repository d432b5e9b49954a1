"""
Monte Carlo experiment runner.

Each run is simulated from its own seed-derived stream, every requested method
is scored on it, and runs are reduced in run-index order. Results therefore do
not depend on the worker count or on completion order.
"""

import logging
from collections.abc import Callable
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import nullcontext
from functools import partial
from importlib import resources

import numpy as np
import pandas as pd

from src.estimation.smoother import (
    BaselineKind,
    HistoryBuffer,
    baseline_correct,
    baseline_init,
    extract_filtered,
    extract_smoothed,
    flis_time_step,
)
from src.estimation.transfer import tflis_init, tflis_step
from src.models import Method, ScenarioConfig
from src.scoring.metrics import MethodScorer, create_scorer, se
from src.simulation.simgen import Realization, RngSpec, simulate_run

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["r_E"] + [f"{stat}_{m.column}" for m in Method for stat in ("mse", "se")]
TRACE_COLUMNS = ["k"] + [f"se_{m.column}" for m in Method]

BASELINE_KINDS = {
    Method.IKF: BaselineKind.IKF,
    Method.IFLS: BaselineKind.IFLS,
    Method.KF: BaselineKind.KF_EXACT,
    Method.FLS: BaselineKind.FLS_EXACT,
}

ProgressCallback = Callable[[int], None]


# =============================================================================
# BUNDLED SCENARIO
# =============================================================================


def load_bundled_scenario() -> ScenarioConfig:
    """Load the position-velocity scenario shipped with the package."""
    text = resources.files("src.experiments").joinpath("paper.json").read_text(encoding="utf-8")
    return ScenarioConfig.model_validate_json(text)


# =============================================================================
# SINGLE RUN
# =============================================================================


def _run_baseline(
    kind: BaselineKind, config: ScenarioConfig, realization: Realization, r_E: float
) -> np.ndarray:
    """Estimates of x_1..x_horizon aligned by time index (NaN where not produced)."""
    model = config.state_space()
    state = baseline_init(kind, model, config.prior(), config.lag)
    buffer = HistoryBuffer(state.lag, model.n_x)
    estimates = np.full((realization.horizon, model.n_x), np.nan)

    for t in range(realization.horizon):
        k = t + 1
        posterior = baseline_correct(kind, state, realization.y_T[t], realization.y_E[t], r_E)
        if kind.is_filter:
            estimates[t] = extract_filtered(posterior)
        else:
            buffer.push_state(posterior)
            if k > state.lag:
                estimates[k - state.lag - 1] = extract_smoothed(buffer, k - state.lag)
        state = flis_time_step(posterior, realization.inputs[t])
    return estimates


def _run_transfer(config: ScenarioConfig, realization: Realization) -> tuple[np.ndarray, np.ndarray]:
    """Filtered and smoothed TFLIS estimates from a single pass over the run."""
    model = config.state_space()
    lag = config.lag
    state = tflis_init(
        model,
        config.prior(),
        config.wishart_prior(),
        lag,
        config.ivb_iterations,
        early_stop=config.ivb_early_stop,
    )
    buffer = HistoryBuffer(lag, model.n_x)
    filtered = np.full((realization.horizon, model.n_x), np.nan)
    smoothed = np.full_like(filtered, np.nan)

    for t in range(realization.horizon):
        k = t + 1
        state, output = tflis_step(
            state, realization.inputs[t], realization.y_T[t], realization.y_E[t]
        )
        filtered[t] = output.reported.block(1, model.n_x)
        buffer.push(k, output.reported.mean)
        if k > lag:
            smoothed[k - lag - 1] = extract_smoothed(buffer, k - lag)
    return filtered, smoothed


def estimate_run(
    config: ScenarioConfig, realization: Realization, r_E: float
) -> dict[Method, np.ndarray]:
    """
    Run every requested method over one realization.

    Args:
        config: Scenario (model, prior, lag, IVB settings, requested methods)
        realization: Simulated truth and observations
        r_E: External observation variance used by the exact baselines

    Returns:
        Per method, a (horizon, n_x) array whose row k-1 estimates x_k
    """
    estimates: dict[Method, np.ndarray] = {}
    for method in config.methods:
        if method in BASELINE_KINDS:
            estimates[method] = _run_baseline(BASELINE_KINDS[method], config, realization, r_E)

    if Method.TFLIS_F in config.methods or Method.TFLIS_S in config.methods:
        filtered, smoothed = _run_transfer(config, realization)
        if Method.TFLIS_F in config.methods:
            estimates[Method.TFLIS_F] = filtered
        if Method.TFLIS_S in config.methods:
            estimates[Method.TFLIS_S] = smoothed
    return estimates


def score_run(config: ScenarioConfig, r_E: float, run_index: int) -> dict[str, np.ndarray]:
    """SE_k series (k = 1..horizon-L) of every requested method for one run."""
    realization = simulate_run(
        config.state_space(),
        config.lag,
        r_E,
        RngSpec(config.master_seed, run_index),
        config.horizon,
    )
    count = config.horizon - config.lag
    scores = {}
    for method, estimates in estimate_run(config, realization, r_E).items():
        scores[method.value] = np.array(
            [se(realization.states[t], estimates[t]) for t in range(count)]
        )
    return scores


# =============================================================================
# AGGREGATION
# =============================================================================


def _chunksize(runs: int, jobs: int) -> int:
    return max(1, runs // (8 * jobs))


def _pool(jobs: int):
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    return ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else nullcontext(None)


def collect_scores(
    config: ScenarioConfig,
    r_E: float,
    executor: Executor | None = None,
    on_progress: ProgressCallback | None = None,
    chunksize: int = 1,
) -> MethodScorer:
    """Score all runs at one r_E; results are added in run-index order."""
    worker = partial(score_run, config, r_E)
    indices = range(config.runs)
    if executor is None:
        results = map(worker, indices)
    else:
        results = executor.map(worker, indices, chunksize=chunksize)

    scorer = create_scorer(config.lag, config.horizon)
    for scores in results:
        scorer.add_run(scores)
        if on_progress is not None:
            on_progress(1)
    return scorer


def run_sweep(
    config: ScenarioConfig, jobs: int = 1, on_progress: ProgressCallback | None = None
) -> pd.DataFrame:
    """
    MSE and its standard error per method for every r_E in the grid.

    Args:
        config: Validated scenario
        jobs: Worker processes (1 runs in-process)
        on_progress: Called with 1 after each completed run

    Returns:
        DataFrame with one row per r_E and the sweep CSV columns
        (unrequested methods are NaN)
    """
    rows = []
    with _pool(jobs) as executor:
        for r_E in config.r_E_grid:
            logger.info("Sweep r_E=%g: %d runs on %d worker(s)", r_E, config.runs, jobs)
            scorer = collect_scores(
                config, r_E, executor, on_progress, _chunksize(config.runs, jobs)
            )
            row = {column: np.nan for column in SWEEP_COLUMNS}
            row["r_E"] = r_E
            for method in config.methods:
                mean, stderr = scorer.summary(method.value)
                row[f"mse_{method.column}"] = mean
                row[f"se_{method.column}"] = stderr
            rows.append(row)
            logger.info("Sweep r_E=%g finished", r_E)
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def run_trace(
    config: ScenarioConfig,
    r_E: float,
    jobs: int = 1,
    on_progress: ProgressCallback | None = None,
) -> pd.DataFrame:
    """
    Average SE_k across runs for k = 1..horizon-L at a single r_E.

    Args:
        config: Validated scenario
        r_E: External observation variance
        jobs: Worker processes (1 runs in-process)
        on_progress: Called with 1 after each completed run

    Returns:
        DataFrame with the trace CSV columns (unrequested methods are NaN)
    """
    if not np.isfinite(r_E) or r_E <= 0:
        raise ValueError(f"r_E must be a positive finite number, got {r_E}")
    logger.info("Trace r_E=%g: %d runs on %d worker(s)", r_E, config.runs, jobs)
    with _pool(jobs) as executor:
        scorer = collect_scores(
            config, r_E, executor, on_progress, _chunksize(config.runs, jobs)
        )

    count = config.horizon - config.lag
    frame = pd.DataFrame({column: np.full(count, np.nan) for column in TRACE_COLUMNS})
    frame["k"] = np.arange(1, count + 1)
    for method in config.methods:
        frame[f"se_{method.column}"] = scorer.per_step_mean(method.value)
    return frame
