"""Experiments initialization and exports."""

from src.experiments.runner import (
    SWEEP_COLUMNS,
    TRACE_COLUMNS,
    collect_scores,
    estimate_run,
    load_bundled_scenario,
    run_sweep,
    run_trace,
    score_run,
)
from src.experiments.verify import SUITES, run_verify

__all__ = [
    "SWEEP_COLUMNS",
    "TRACE_COLUMNS",
    "collect_scores",
    "estimate_run",
    "load_bundled_scenario",
    "run_sweep",
    "run_trace",
    "score_run",
    "SUITES",
    "run_verify",
]
