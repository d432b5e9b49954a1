"""Kalman FLIS with Bayesian knowledge transfer from an external observation stream.

Each external observation y_E;q is read as a noisy realization of the fictive
output y_q ~ N(C x_q, R Ξ), where the diagonal scale Ξ is unknown and carries an
inverse-Wishart belief iW(Σ, ν). At every time step an iterative variational
Bayes (IVB) loop alternates two chains over the window q = k-w+1..k:

- the Σ chain accumulates residual energy of the external data under the
  previous iteration's state belief;
- the X chain re-absorbs the external data with the covariance R ∘ Ξ̄.

Only the statistics after the oldest window element (q = k-l) are committed and
propagated; the end-of-chain belief is reported.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from src.config import settings
from src.estimation.matmodel import (
    GaussianStats,
    StateSpaceModel,
    WishartStats,
    build_output_selector,
    build_transition,
    propagate,
)
from src.estimation.sdu import sequential_data_update
from src.estimation.smoother import window_sizes

logger = logging.getLogger(__name__)

# Each R ∘ Ξ̄ entry is floored at this fraction of the matching R entry
XI_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class TflisState:
    """Predicted belief over X_k plus the committed scale statistics Σ_{k-w}, ν_{k-w}.

    ``ext_window`` holds w-1 external observations, one fewer than the window
    the IVB chains read: those of times k-w+1..k-1, oldest first. y_E of time k
    is only known when ``tflis_step`` is called, so the full w-length window
    ``(*ext_window, y_E)`` exists only inside the step.
    """

    model: StateSpaceModel
    lag: int
    k: int
    belief_pred: GaussianStats
    committed_sigma: WishartStats
    ext_window: tuple[np.ndarray, ...] = ()
    n_iter: int = 10
    early_stop: bool = False

    def __post_init__(self):
        if self.lag < 0:
            raise ValueError(f"lag must be >= 0, got {self.lag}")
        if self.n_iter < 0:
            raise ValueError(f"IVB iteration count must be >= 0, got {self.n_iter}")
        if self.belief_pred.dim != self.w * self.model.n_x:
            raise ValueError(
                f"belief_pred must have dimension {self.w * self.model.n_x}, "
                f"got {self.belief_pred.dim}"
            )
        if self.committed_sigma.sigma.shape[0] != self.model.n_y:
            raise ValueError(f"sigma must have {self.model.n_y} diagonal entries")
        if len(self.ext_window) != self.w - 1:
            raise ValueError(
                f"ext_window must hold {self.w - 1} observations, got {len(self.ext_window)}"
            )

    @property
    def w(self) -> int:
        return window_sizes(self.k, self.lag)[0]

    @property
    def l(self) -> int:  # noqa: E743
        return window_sizes(self.k, self.lag)[1]


@dataclass(frozen=True, eq=False)
class TflisStepOutput:
    """Everything one TFLIS step produces.

    ``reported`` is the FPD-optimal posterior shown to the experimenter,
    ``predicted`` the committed belief pushed through the time step.
    """

    reported: GaussianStats
    predicted: GaussianStats
    committed_sigma_next: WishartStats
    xi_bar: np.ndarray
    target_posterior: GaussianStats
    sigma_chain: tuple[np.ndarray, ...] = field(default=())
    xi_divisor: float = 0.0
    iterations: int = 0


# =============================================================================
# BUILDING BLOCKS
# =============================================================================


def sigma_accumulate(
    sigma_prev: np.ndarray,
    y_E: np.ndarray,
    Cq: np.ndarray,
    Xhat_prev_iter: np.ndarray,
    P_prev_iter: np.ndarray,
    R: np.ndarray,
) -> np.ndarray:
    """Add the expected residual energy of one external observation to Σ.

    Returns sigma_prev + R^-1 ∘ [diag(y_E - Cq X)^2 + Cq P Cq'], keeping only
    diagonals. ``R`` may be the diagonal matrix or its diagonal.
    """
    sigma_prev = np.asarray(sigma_prev, dtype=float).reshape(-1)
    y_E = np.asarray(y_E, dtype=float).reshape(-1)
    Cq = np.atleast_2d(np.asarray(Cq, dtype=float))
    Xhat = np.asarray(Xhat_prev_iter, dtype=float).reshape(-1)
    P = np.asarray(P_prev_iter, dtype=float)
    R = np.asarray(R, dtype=float)
    r_diag = np.diag(R) if R.ndim == 2 else R.reshape(-1)

    n_y = sigma_prev.shape[0]
    if y_E.shape[0] != n_y or r_diag.shape[0] != n_y or Cq.shape[0] != n_y:
        raise ValueError("sigma_prev, y_E, R and Cq rows must share the output dimension")
    if Cq.shape[1] != Xhat.shape[0] or P.shape != (Xhat.shape[0], Xhat.shape[0]):
        raise ValueError(
            f"Cq ({Cq.shape}), X ({Xhat.shape}) and P ({P.shape}) dimensions disagree"
        )

    residual = y_E - Cq @ Xhat
    # diag(Cq P Cq') without forming the full product
    spread = np.einsum("ij,jk,ik->i", Cq, P, Cq)
    return sigma_prev + (residual**2 + spread) / r_diag


def xi_mean(sigma_k: np.ndarray, nu_base: float, w: int) -> np.ndarray:
    """Posterior mean estimate Ξ̄ = Σ_k / (ν_{k-w} + w), diagonal entries only."""
    divisor = nu_base + w
    if divisor <= 0:
        raise ValueError(f"nu_base + w must be > 0, got {divisor}")
    return np.asarray(sigma_k, dtype=float) / divisor


# =============================================================================
# TFLIS RECURSION
# =============================================================================


def tflis_init(
    model: StateSpaceModel,
    prior_state: GaussianStats,
    sigma0: WishartStats | np.ndarray,
    lag: int,
    n_iter: int = 10,
    *,
    nu0: float | None = None,
    early_stop: bool = False,
) -> TflisState:
    """Start the transfer smoother at k = 1.

    ``sigma0`` may be given as ``WishartStats`` or as a (diagonal) matrix; in the
    latter case ``nu0`` supplies the degrees of freedom.
    """
    if not isinstance(sigma0, WishartStats):
        sigma0 = WishartStats.from_matrix(sigma0, 0.0 if nu0 is None else nu0)
    if prior_state.dim != model.n_x:
        raise ValueError(f"prior must have dimension {model.n_x}, got {prior_state.dim}")
    if n_iter < 1:
        logger.debug("IVB disabled (n_iter=%d): estimates equal the isolated smoother", n_iter)
    return TflisState(
        model=model,
        lag=lag,
        k=1,
        belief_pred=prior_state,
        committed_sigma=sigma0,
        n_iter=n_iter,
        early_stop=early_stop,
    )


def _finite(name: str, value: np.ndarray, n: int) -> np.ndarray:
    value = np.asarray(value, dtype=float).reshape(-1)
    if value.shape[0] != n:
        raise ValueError(f"{name} must have {n} entries, got {value.shape[0]}")
    if not np.all(np.isfinite(value)):
        raise ValueError(f"{name} contains non-finite entries")
    return value


def tflis_step(
    state: TflisState, u: np.ndarray, y_T: np.ndarray, y_E: np.ndarray
) -> tuple[TflisState, TflisStepOutput]:
    """Process time k: target data step, IVB transfer, commit and time step."""
    model = state.model
    y_T = _finite("y_T", y_T, model.n_y)
    y_E = _finite("y_E", y_E, model.n_y)
    u = _finite("u", u, model.n_u)

    k, lag = state.k, state.lag
    w, l = state.w, state.l
    r_diag = model.r_diag
    committed = state.committed_sigma
    aug = build_transition(w, l, model.A, model.B, model.Q, model.C)

    # Target data step
    x0, P0 = sequential_data_update(
        state.belief_pred.mean, state.belief_pred.cov, aug.Cq, r_diag, y_T
    )

    # Window q = k-w+1..k, oldest first; q sits at block offset k-q+1
    observations = (*state.ext_window, y_E)
    selectors = [build_output_selector(w, w - i, model.C) for i in range(w)]
    divisor = committed.nu + w

    X_prev, P_prev = x0, P0
    X_first, P_first = x0, P0
    sigma_chain: tuple[np.ndarray, ...] = ()
    xi_bar = xi_mean(committed.sigma, committed.nu, w)
    iterations = 0

    for j in range(1, state.n_iter + 1):
        sigma = committed.sigma
        chain = []
        for Cq, obs in zip(selectors, observations):
            sigma = sigma_accumulate(sigma, obs, Cq, X_prev, P_prev, r_diag)
            chain.append(sigma)
        xi_bar = xi_mean(sigma, committed.nu, w)
        gamma = np.maximum(r_diag * xi_bar, XI_FLOOR * r_diag)

        X, P = x0, P0
        for i, (Cq, obs) in enumerate(zip(selectors, observations)):
            X, P = sequential_data_update(X, P, Cq, gamma, obs)
            if i == 0:
                X_first, P_first = X, P

        change = np.linalg.norm(X - X_prev)
        X_prev, P_prev = X, P
        sigma_chain = tuple(chain)
        iterations = j
        if state.early_stop and change <= settings.ivb_tolerance * max(np.linalg.norm(X), 1.0):
            logger.debug("IVB converged after %d iterations at k=%d", j, k)
            break

    reported = GaussianStats(mean=X_prev, cov=P_prev)
    target_posterior = GaussianStats(mean=x0, cov=P0)

    # Commit: only k > L carries an informative transfer for the oldest element
    if k > lag and iterations > 0:
        committed_belief = GaussianStats(mean=X_first, cov=P_first)
        committed_next = WishartStats(sigma=sigma_chain[0], nu=committed.nu + 1)
    elif k > lag:
        committed_belief = target_posterior
        committed_next = WishartStats(sigma=committed.sigma, nu=committed.nu + 1)
    else:
        committed_belief = target_posterior
        committed_next = committed

    predicted = propagate(committed_belief, aug, u)

    w_next, _ = window_sizes(k + 1, lag)
    window = observations[len(observations) - (w_next - 1) :] if w_next > 1 else ()

    next_state = TflisState(
        model=model,
        lag=lag,
        k=k + 1,
        belief_pred=predicted,
        committed_sigma=committed_next,
        ext_window=tuple(window),
        n_iter=state.n_iter,
        early_stop=state.early_stop,
    )
    output = TflisStepOutput(
        reported=reported,
        predicted=predicted,
        committed_sigma_next=committed_next,
        xi_bar=xi_bar,
        target_posterior=target_posterior,
        sigma_chain=sigma_chain,
        xi_divisor=divisor,
        iterations=iterations,
    )
    return next_state, output

