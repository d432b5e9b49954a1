"""Estimation initialization and exports."""

from src.estimation.matmodel import (
    AugmentedMatrices,
    GaussianStats,
    StateSpaceModel,
    WishartStats,
    build_output_selector,
    build_transition,
    propagate,
)
from src.estimation.sdu import UNINFORMATIVE, sequential_data_update
from src.estimation.smoother import (
    BaselineKind,
    FlisState,
    HistoryBuffer,
    NotYetAvailableError,
    baseline_correct,
    baseline_init,
    baseline_step,
    extract_filtered,
    extract_smoothed,
    flis_data_step,
    flis_init,
    flis_time_step,
)
from src.estimation.transfer import (
    TflisState,
    TflisStepOutput,
    sigma_accumulate,
    tflis_init,
    tflis_step,
    xi_mean,
)

__all__ = [
    # Model and beliefs
    "StateSpaceModel",
    "GaussianStats",
    "WishartStats",
    "AugmentedMatrices",
    "build_output_selector",
    "build_transition",
    "propagate",
    # Sequential update
    "sequential_data_update",
    "UNINFORMATIVE",
    # Smoother and baselines
    "FlisState",
    "BaselineKind",
    "HistoryBuffer",
    "NotYetAvailableError",
    "flis_init",
    "flis_data_step",
    "flis_time_step",
    "baseline_init",
    "baseline_correct",
    "baseline_step",
    "extract_filtered",
    "extract_smoothed",
    # Knowledge transfer
    "TflisState",
    "TflisStepOutput",
    "sigma_accumulate",
    "xi_mean",
    "tflis_init",
    "tflis_step",
]
