"""Squared-error scoring and Monte Carlo aggregation."""

import math
from collections import defaultdict
from collections.abc import Sequence

import numpy as np


def se(truth: np.ndarray, estimate: np.ndarray) -> float:
    """Squared Euclidean distance between the true state and its estimate."""
    truth = np.asarray(truth, dtype=float).reshape(-1)
    estimate = np.asarray(estimate, dtype=float).reshape(-1)
    if truth.shape != estimate.shape:
        raise ValueError(f"truth {truth.shape} and estimate {estimate.shape} differ in shape")
    diff = truth - estimate
    return float(diff @ diff)


def mse(se_series: Sequence[float], lag: int, horizon: int) -> float:
    """Mean of SE_1..SE_{horizon-L}; the last L steps have no smoothed counterpart."""
    count = horizon - lag
    if count < 1:
        raise ValueError(f"horizon ({horizon}) must exceed the lag ({lag})")
    series = np.asarray(se_series, dtype=float)
    if series.shape[0] < count:
        raise ValueError(f"need at least {count} SE values, got {series.shape[0]}")
    return float(np.mean(series[:count]))


def aggregate(per_run_mse: Sequence[float]) -> tuple[float, float]:
    """Sample mean and standard error of the mean (0 for a single run)."""
    values = np.asarray(per_run_mse, dtype=float)
    if values.size == 0:
        raise ValueError("aggregate needs at least one run")
    mean = float(np.mean(values))
    if values.size == 1:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(values.size))


class MethodScorer:
    """Collects per-run SE series by method and reduces them.

    Runs must be added in run-index order; reductions then do not depend on
    how the runs were scheduled.
    """

    def __init__(self, lag: int, horizon: int):
        if horizon <= lag:
            raise ValueError(f"horizon ({horizon}) must exceed the lag ({lag})")
        self.lag = lag
        self.horizon = horizon
        self._series: dict[str, list[np.ndarray]] = defaultdict(list)

    @property
    def methods(self) -> list[str]:
        return list(self._series)

    def add_run(self, se_by_method: dict[str, np.ndarray]) -> None:
        """Record one run's aligned SE series (length horizon - L) per method."""
        for method, series in se_by_method.items():
            series = np.asarray(series, dtype=float)
            if series.shape[0] < self.horizon - self.lag:
                raise ValueError(
                    f"{method}: need {self.horizon - self.lag} SE values, got {series.shape[0]}"
                )
            self._series[method].append(series)

    def run_count(self, method: str) -> int:
        return len(self._series.get(method, []))

    def summary(self, method: str) -> tuple[float, float]:
        """(mean MSE, standard error) across runs for ``method``."""
        runs = self._series.get(method)
        if not runs:
            raise KeyError(f"no runs recorded for {method}")
        return aggregate([mse(s, self.lag, self.horizon) for s in runs])

    def per_step_mean(self, method: str) -> np.ndarray:
        """Average SE_k across runs for k = 1..horizon-L."""
        runs = self._series.get(method)
        if not runs:
            raise KeyError(f"no runs recorded for {method}")
        count = self.horizon - self.lag
        return np.mean(np.vstack([s[:count] for s in runs]), axis=0)


def create_scorer(lag: int, horizon: int) -> MethodScorer:
    """Factory function to create a method scorer."""
    return MethodScorer(lag, horizon)
