"""Matrix-inversion-free sequential data update.

The Gaussian posterior N(x|mu, S) ∝ N(x|mu0, S0) N(z|Hx, Gamma) is computed by
absorbing the rows of ``z`` one scalar at a time. Gamma must be diagonal, so the
scalar factors are independent and no matrix inverse is ever formed.
"""

import numpy as np

from src.estimation.matmodel import clip_negative_eigenvalues, symmetrize

# Rows whose innovation variance falls below this are treated as non-informative
DENOMINATOR_FLOOR = 1e-300

# Variance value marking a non-informative row (f ∝ 1)
UNINFORMATIVE = np.inf


def _gamma_diagonal(gamma, m: int) -> np.ndarray:
    arr = np.asarray(gamma, dtype=float)
    if arr.ndim == 2:
        if arr.shape != (m, m):
            raise ValueError(f"Gamma must be {m}x{m}, got shape {arr.shape}")
        if np.any(arr != np.diag(np.diag(arr))):
            raise ValueError("Gamma must be diagonal")
        arr = np.diag(arr)
    arr = arr.reshape(-1)
    if arr.shape[0] != m:
        raise ValueError(f"Gamma must have {m} diagonal entries, got {arr.shape[0]}")
    return arr


def sequential_data_update(
    mu0: np.ndarray,
    S0: np.ndarray,
    H: np.ndarray,
    gamma: np.ndarray,
    z: np.ndarray,
    *,
    allow_uninformative: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Bayes update of N(mu0, S0) with the observation z ~ N(H x, diag(gamma)).

    Args:
        mu0: Prior mean, shape (n,)
        S0: Prior covariance, shape (n, n)
        H: Observation matrix, shape (m, n)
        gamma: Diagonal of the observation covariance (shape (m,)) or the
            diagonal matrix itself
        z: Observation, shape (m,)
        allow_uninformative: Accept ``UNINFORMATIVE`` (+inf) entries in gamma and
            skip those rows

    Returns:
        Posterior mean and covariance. Rows are absorbed in ascending order and
        the covariance uses the Joseph form.
    """
    mu = np.array(mu0, dtype=float).reshape(-1)
    S = np.array(S0, dtype=float)
    H = np.atleast_2d(np.asarray(H, dtype=float))
    z = np.asarray(z, dtype=float).reshape(-1)
    n = mu.shape[0]
    m = z.shape[0]

    if S.shape != (n, n):
        raise ValueError(f"S0 must be {n}x{n}, got shape {S.shape}")
    if H.shape != (m, n):
        raise ValueError(f"H must be {m}x{n}, got shape {H.shape}")
    gamma = _gamma_diagonal(gamma, m)

    if np.any(np.isnan(gamma)) or np.any(gamma <= 0):
        raise ValueError("Gamma diagonal entries must be > 0")
    skip = np.isposinf(gamma)
    if np.any(skip) and not allow_uninformative:
        raise ValueError("Gamma contains infinite entries; pass allow_uninformative=True")
    if not np.all(np.isfinite(z[~skip])):
        raise ValueError("z contains non-finite entries")

    eye = np.eye(n)
    for i in range(m):
        if skip[i]:
            continue
        h = H[i]
        Sh = S @ h
        denom = gamma[i] + h @ Sh
        if denom < DENOMINATOR_FLOOR:
            continue
        K = Sh / denom
        mu = mu + K * (z[i] - h @ mu)
        IKH = eye - np.outer(K, h)
        S = IKH @ S @ IKH.T + gamma[i] * np.outer(K, K)

    # A prior far wider than the posterior leaves round-off of its own scale in S
    return mu, clip_negative_eigenvalues(symmetrize(S))
