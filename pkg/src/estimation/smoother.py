"""Kalman fixed-lag interval smoother (FLIS) and the baseline estimators.

The FLIS keeps the joint Gaussian belief over the last ``w = min(k, L+1)``
states. With ``L = 0`` it is an ordinary Kalman filter. The baselines reuse the
same recursion:

- iKF / iFLS process only the target observations (L = 0 / lag L).
- KF_exact / FLS_exact also absorb the external observation through Bayes' rule,
  given its exact model N(C x_k, r_E I).
"""

import logging
from collections import deque
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from src.estimation.matmodel import (
    GaussianStats,
    StateSpaceModel,
    build_output_selector,
    build_transition,
    propagate,
)
from src.estimation.sdu import sequential_data_update

logger = logging.getLogger(__name__)


class NotYetAvailableError(LookupError):
    """A smoothed estimate was requested before the data it needs was processed."""


class BaselineKind(str, Enum):
    """Reference estimators compared against the knowledge-transfer smoother."""

    IKF = "iKF"
    IFLS = "iFLS"
    KF_EXACT = "KF_exact"
    FLS_EXACT = "FLS_exact"

    @property
    def uses_external(self) -> bool:
        return self in (BaselineKind.KF_EXACT, BaselineKind.FLS_EXACT)

    @property
    def is_filter(self) -> bool:
        return self in (BaselineKind.IKF, BaselineKind.KF_EXACT)


def window_sizes(k: int, lag: int) -> tuple[int, int]:
    """Return (w, l) = (min(k, L+1), min(k, L))."""
    return min(k, lag + 1), min(k, lag)


@dataclass(frozen=True, eq=False)
class FlisState:
    """Belief over the augmented state X_k at time ``k``.

    ``corrected`` tells whether the target observation of time ``k`` has already
    been absorbed.
    """

    model: StateSpaceModel
    lag: int
    k: int
    belief: GaussianStats
    corrected: bool = False

    def __post_init__(self):
        if self.lag < 0:
            raise ValueError(f"lag must be >= 0, got {self.lag}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        expected = self.w * self.model.n_x
        if self.belief.dim != expected:
            raise ValueError(f"belief must have dimension {expected}, got {self.belief.dim}")

    @property
    def w(self) -> int:
        return window_sizes(self.k, self.lag)[0]

    @property
    def l(self) -> int:  # noqa: E743
        return window_sizes(self.k, self.lag)[1]


def _check_observation(name: str, y: np.ndarray, n_y: int) -> np.ndarray:
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != n_y:
        raise ValueError(f"{name} must have {n_y} entries, got {y.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise ValueError(f"{name} contains non-finite entries")
    return y


def _absorb(state: FlisState, z: np.ndarray, gamma: np.ndarray) -> FlisState:
    """Absorb an observation of the newest state x_k with diagonal noise ``gamma``."""
    H = build_output_selector(state.w, 1, state.model.C)
    mean, cov = sequential_data_update(state.belief.mean, state.belief.cov, H, gamma, z)
    return replace(state, belief=GaussianStats(mean=mean, cov=cov), corrected=True)


# =============================================================================
# FLIS RECURSION
# =============================================================================


def flis_init(model: StateSpaceModel, prior: GaussianStats, lag: int) -> FlisState:
    """Start the smoother at k = 1 with the prior belief over x_1."""
    if lag < 0:
        raise ValueError(f"lag must be >= 0, got {lag}")
    if prior.dim != model.n_x:
        raise ValueError(f"prior must have dimension {model.n_x}, got {prior.dim}")
    return FlisState(model=model, lag=lag, k=1, belief=prior)


def flis_data_step(state: FlisState, y_T: np.ndarray) -> FlisState:
    """Correct the belief with the target observation of time k."""
    y_T = _check_observation("y_T", y_T, state.model.n_y)
    return _absorb(state, y_T, state.model.r_diag)


def flis_time_step(state: FlisState, u: np.ndarray) -> FlisState:
    """Predict X_{k+1}; grows the window while k <= L, otherwise drops the oldest block."""
    if not state.corrected:
        raise ValueError(f"time step at k={state.k} requires the data step first")
    model = state.model
    aug = build_transition(state.w, state.l, model.A, model.B, model.Q)
    belief = propagate(state.belief, aug, u)
    if state.k <= state.lag:
        logger.debug("window grows to %d blocks at k=%d", state.w + 1, state.k + 1)
    return FlisState(model=model, lag=state.lag, k=state.k + 1, belief=belief)


# =============================================================================
# BASELINES
# =============================================================================


def baseline_init(
    kind: BaselineKind, model: StateSpaceModel, prior: GaussianStats, lag: int
) -> FlisState:
    """Initial state for a baseline; filter kinds always run with a zero lag."""
    return flis_init(model, prior, 0 if kind.is_filter else lag)


def baseline_correct(
    kind: BaselineKind,
    state: FlisState,
    y_T: np.ndarray,
    y_E: np.ndarray | None = None,
    r_E: float | None = None,
) -> FlisState:
    """Data step(s) of a baseline: target first, then the external observation."""
    kind = BaselineKind(kind)
    if kind.is_filter and state.lag != 0:
        raise ValueError(f"{kind.value} runs with lag 0, got a state with lag {state.lag}")
    state = flis_data_step(state, y_T)
    if not kind.uses_external:
        return state
    if y_E is None or r_E is None:
        raise ValueError(f"{kind.value} requires both y_E and r_E")
    if not np.isfinite(r_E) or r_E <= 0:
        raise ValueError(f"r_E must be a positive finite number, got {r_E}")
    y_E = _check_observation("y_E", y_E, state.model.n_y)
    return _absorb(state, y_E, np.full(state.model.n_y, float(r_E)))


def baseline_step(
    kind: BaselineKind,
    state: FlisState,
    u: np.ndarray,
    y_T: np.ndarray,
    y_E: np.ndarray | None = None,
    r_E: float | None = None,
) -> FlisState:
    """One full baseline step: data step(s) followed by the time step."""
    return flis_time_step(baseline_correct(kind, state, y_T, y_E, r_E), u)


# =============================================================================
# ESTIMATE EXTRACTION
# =============================================================================


def extract_filtered(state: FlisState) -> np.ndarray:
    """Estimate of the newest state x_k (first block of the augmented mean)."""
    return state.belief.block(1, state.model.n_x)


class HistoryBuffer:
    """Ring of the last L+1 augmented means, keyed by the time they were produced."""

    def __init__(self, lag: int, n_x: int):
        if lag < 0:
            raise ValueError(f"lag must be >= 0, got {lag}")
        self.lag = lag
        self.n_x = n_x
        self._entries: deque[tuple[int, np.ndarray]] = deque(maxlen=lag + 1)

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def latest_time(self) -> int | None:
        return self._entries[-1][0] if self._entries else None

    def push(self, k: int, mean: np.ndarray) -> None:
        if self._entries and k != self._entries[-1][0] + 1:
            raise ValueError(f"expected time {self._entries[-1][0] + 1}, got {k}")
        self._entries.append((k, np.array(mean, dtype=float)))

    def push_state(self, state: FlisState) -> None:
        self.push(state.k, state.belief.mean)

    def mean_at(self, k: int) -> np.ndarray:
        for time, mean in self._entries:
            if time == k:
                return mean
        raise LookupError(f"no augmented mean for time {k} in the ring")


def extract_smoothed(buffer: HistoryBuffer, k: int) -> np.ndarray:
    """Smoothed estimate of x_k: block L+1 of the augmented mean produced at k+L."""
    target = k + buffer.lag
    latest = buffer.latest_time
    if latest is None or latest < target:
        raise NotYetAvailableError(
            f"smoothed estimate of x_{k} needs data up to time {target} (have {latest})"
        )
    try:
        mean = buffer.mean_at(target)
    except LookupError as e:
        raise NotYetAvailableError(f"x_{k} was evicted from the ring: {e}") from e
    block = buffer.lag + 1
    if mean.shape[0] < block * buffer.n_x:
        raise NotYetAvailableError(f"window at time {target} does not reach x_{k}")
    return mean[(block - 1) * buffer.n_x : block * buffer.n_x].copy()
