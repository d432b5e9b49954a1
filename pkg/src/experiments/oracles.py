"""Independent reference computations used to cross-check the estimators.

None of these routines share code with the recursive estimators: they solve the
same inference problems in batch form with explicit matrix inverses.
"""

import numpy as np

from src.estimation.matmodel import GaussianStats, StateSpaceModel


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    """||actual - expected|| / ||expected|| (Frobenius / Euclidean)."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    scale = max(float(np.linalg.norm(expected)), np.finfo(float).tiny)
    return float(np.linalg.norm(actual - expected)) / scale


def batch_posterior(
    mu0: np.ndarray, S0: np.ndarray, H: np.ndarray, gamma: np.ndarray, z: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Information-form posterior S = (S0^-1 + H' Γ^-1 H)^-1, mu = S (S0^-1 mu0 + H' Γ^-1 z)."""
    S0_inv = np.linalg.inv(S0)
    gamma_inv = np.diag(1.0 / np.asarray(gamma, dtype=float).reshape(-1))
    S = np.linalg.inv(S0_inv + H.T @ gamma_inv @ H)
    mu = S @ (S0_inv @ mu0 + H.T @ gamma_inv @ z)
    return mu, 0.5 * (S + S.T)


def textbook_kalman_filter(
    model: StateSpaceModel,
    prior: GaussianStats,
    inputs: np.ndarray,
    observations: np.ndarray,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Predict/update Kalman filter with the explicit gain K = P C' (C P C' + R)^-1.

    Returns the posterior (mean, covariance) of every step.
    """
    x, P = prior.mean.copy(), prior.cov.copy()
    C, R = model.C, model.R
    eye = np.eye(model.n_x)
    posteriors = []
    for u, y in zip(inputs, observations):
        S = C @ P @ C.T + R
        K = P @ C.T @ np.linalg.inv(S)
        x = x + K @ (y - C @ x)
        IKC = eye - K @ C
        P = IKC @ P @ IKC.T + K @ R @ K.T
        posteriors.append((x.copy(), P.copy()))
        x = model.A @ x + model.B @ np.atleast_1d(u)
        P = model.A @ P @ model.A.T + model.Q
    return posteriors


def _noise_columns(Q: np.ndarray, rel_tol: float = 1e-12) -> np.ndarray:
    """G with G G' = Q, dropping numerically null directions of a singular Q."""
    eigvals, eigvecs = np.linalg.eigh(0.5 * (Q + Q.T))
    top = float(np.max(eigvals, initial=0.0))
    keep = eigvals > rel_tol * top if top > 0 else np.zeros_like(eigvals, dtype=bool)
    return eigvecs[:, keep] * np.sqrt(eigvals[keep])


def window_joint_posterior(
    model: StateSpaceModel,
    prior: GaussianStats,
    inputs: np.ndarray,
    observations: np.ndarray,
    k: int,
    lag: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Joint posterior of [x_k; ...; x_{k-w+1}] given y_1..y_k, solved in one batch.

    The trajectory is written as x_t = M_t θ + c_t with θ = [x_1, ξ_1, ..., ξ_{k-1}],
    process noise G ξ_t and ξ_t ~ N(0, I). Singular Q only shrinks the width of G,
    so the prior on θ stays invertible and the posterior is solved in information form.
    """
    n_x = model.n_x
    G = _noise_columns(model.Q)
    r = G.shape[1]
    dim = n_x + (k - 1) * r

    M = np.zeros((n_x, dim))
    M[:, :n_x] = np.eye(n_x)
    c = np.zeros(n_x)
    maps = []
    for t in range(k):
        maps.append((M.copy(), c.copy()))
        if t == k - 1:
            break
        noise = np.zeros((n_x, dim))
        noise[:, n_x + t * r : n_x + (t + 1) * r] = G
        M = model.A @ M + noise
        c = model.A @ c + model.B @ np.atleast_1d(inputs[t])

    prior_info = np.zeros((dim, dim))
    prior_info[:n_x, :n_x] = np.linalg.inv(prior.cov)
    prior_info[n_x:, n_x:] = np.eye(dim - n_x)
    prior_mean = np.zeros(dim)
    prior_mean[:n_x] = prior.mean

    R_inv = np.linalg.inv(model.R)
    info = prior_info.copy()
    eta = prior_info @ prior_mean
    for t in range(k):
        M_t, c_t = maps[t]
        J = model.C @ M_t
        info += J.T @ R_inv @ J
        eta += J.T @ R_inv @ (observations[t] - model.C @ c_t)

    theta_cov = np.linalg.inv(info)
    theta = theta_cov @ eta

    w = min(k, lag + 1)
    stacked_M = np.vstack([maps[t][0] for t in range(k - 1, k - w - 1, -1)])
    stacked_c = np.concatenate([maps[t][1] for t in range(k - 1, k - w - 1, -1)])
    mean = stacked_M @ theta + stacked_c
    cov = stacked_M @ theta_cov @ stacked_M.T
    return mean, 0.5 * (cov + cov.T)


def random_spd(rng: np.random.Generator, n: int, max_condition: float = 1e6) -> np.ndarray:
    """Random symmetric positive definite matrix with condition number <= max_condition."""
    basis, _ = np.linalg.qr(rng.standard_normal((n, n)))
    log_cond = rng.uniform(0.0, np.log10(max_condition))
    eigvals = np.logspace(0.0, -log_cond, n) * rng.uniform(0.1, 10.0)
    S = basis @ np.diag(eigvals) @ basis.T
    return 0.5 * (S + S.T)
