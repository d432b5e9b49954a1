"""State-space model, belief statistics and augmented-matrix builders.

The fixed-lag interval smoother works on the augmented state
``X_k = [x_k; x_{k-1}; ...; x_{k-w+1}]`` (newest block first). The builders in
this module produce the block matrices that select one block of ``X_k`` for an
observation and that shift the window forward by one time step.
"""

from dataclasses import dataclass

import numpy as np

# Tolerances for the structural checks on covariance-like matrices
MODEL_TOL = 1e-12
BELIEF_TOL = 1e-9


def _as_matrix(name: str, value, *, ncols: int | None = None) -> np.ndarray:
    """Convert ``value`` to a read-only float matrix."""
    arr = np.array(value, dtype=float)
    if arr.ndim == 1 and ncols == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _as_vector(name: str, value) -> np.ndarray:
    arr = np.array(value, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def symmetrize(P: np.ndarray) -> np.ndarray:
    """Return (P + P') / 2."""
    return 0.5 * (P + P.T)


def clip_negative_eigenvalues(P: np.ndarray) -> np.ndarray:
    """Symmetric ``P`` with round-off negative eigenvalues set to zero.

    Returned unchanged when it is already PSD.
    """
    if P.size == 0:
        return P
    eigvals, eigvecs = np.linalg.eigh(P)
    if eigvals[0] >= 0:
        return P
    return symmetrize((eigvecs * np.maximum(eigvals, 0.0)) @ eigvecs.T)


def covariance_defects(P: np.ndarray) -> tuple[float, float]:
    """Asymmetry and most negative eigenvalue of ``P``, both relative to ||P||."""
    scale = max(np.linalg.norm(P), np.finfo(float).tiny)
    asymmetry = float(np.max(np.abs(P - P.T))) / scale if P.size else 0.0
    min_eig = float(np.min(np.linalg.eigvalsh(symmetrize(P)))) / scale if P.size else 0.0
    return asymmetry, min_eig


def is_covariance(P: np.ndarray, tol: float = BELIEF_TOL) -> bool:
    """True when ``P`` is symmetric and PSD within ``tol`` relative to its norm."""
    asymmetry, min_eig = covariance_defects(P)
    return asymmetry <= tol and min_eig >= -tol


def assert_covariance(P: np.ndarray, tol: float = BELIEF_TOL) -> None:
    """Debug-mode PSD/symmetry assertion, compiled out under ``python -O``."""
    if __debug__:
        asymmetry, min_eig = covariance_defects(P)
        assert asymmetry <= tol, f"covariance asymmetry {asymmetry:.3e} exceeds {tol:.1e}"
        assert min_eig >= -tol, f"covariance eigenvalue {min_eig:.3e} below -{tol:.1e}"


# =============================================================================
# VALUE TYPES
# =============================================================================


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Linear Gaussian model x_{k+1} = A x_k + B u_k + w_k, y_k = C x_k + v_k.

    ``R`` must be strictly diagonal with positive entries; the sequential
    update relies on conditionally independent output channels.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        A = _as_matrix("A", self.A)
        n_x = A.shape[0]
        B = _as_matrix("B", self.B, ncols=1)
        C = _as_matrix("C", self.C)
        Q = _as_matrix("Q", self.Q)
        R = _as_matrix("R", self.R)

        if A.shape != (n_x, n_x):
            raise ValueError(f"A must be square, got shape {A.shape}")
        if B.shape[0] != n_x:
            raise ValueError(f"B must have {n_x} rows, got shape {B.shape}")
        if C.shape[1] != n_x:
            raise ValueError(f"C must have {n_x} columns, got shape {C.shape}")
        if Q.shape != (n_x, n_x):
            raise ValueError(f"Q must be {n_x}x{n_x}, got shape {Q.shape}")
        n_y = C.shape[0]
        if R.shape != (n_y, n_y):
            raise ValueError(f"R must be {n_y}x{n_y}, got shape {R.shape}")

        q_norm = np.linalg.norm(Q)
        if np.max(np.abs(Q - Q.T), initial=0.0) > MODEL_TOL * q_norm:
            raise ValueError("Q must be symmetric")
        if q_norm > 0 and np.min(np.linalg.eigvalsh(symmetrize(Q))) < -MODEL_TOL * q_norm:
            raise ValueError("Q must be positive semidefinite")
        if np.any(R != np.diag(np.diag(R))):
            raise ValueError("R must be diagonal")
        if np.any(np.diag(R) <= 0):
            raise ValueError("R must have strictly positive diagonal entries")

        for name, arr in (("A", A), ("B", B), ("C", C), ("Q", Q), ("R", R)):
            object.__setattr__(self, name, arr)

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_u(self) -> int:
        return self.B.shape[1]

    @property
    def n_y(self) -> int:
        return self.C.shape[0]

    @property
    def r_diag(self) -> np.ndarray:
        """Diagonal of R as a vector."""
        return np.diag(self.R).copy()


@dataclass(frozen=True, eq=False)
class GaussianStats:
    """Mean/covariance pair of a normal belief."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _as_vector("mean", self.mean)
        cov = _as_matrix("cov", self.cov)
        n = mean.shape[0]
        if cov.shape != (n, n):
            raise ValueError(f"cov must be {n}x{n} to match the mean, got {cov.shape}")
        assert_covariance(cov, BELIEF_TOL)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def block(self, index: int, size: int) -> np.ndarray:
        """Mean of the 1-based block ``index`` of width ``size``."""
        if index < 1 or index * size > self.dim:
            raise ValueError(f"block {index} of size {size} outside a {self.dim}-vector")
        return self.mean[(index - 1) * size : index * size].copy()


@dataclass(frozen=True, eq=False)
class WishartStats:
    """Diagonal scale Σ (stored as its diagonal) and degrees of freedom ν."""

    sigma: np.ndarray
    nu: float = 0.0

    def __post_init__(self):
        sigma = _as_vector("sigma", self.sigma)
        if np.any(sigma < 0):
            raise ValueError("sigma diagonal entries must be nonnegative")
        if self.nu < 0:
            raise ValueError(f"nu must be nonnegative, got {self.nu}")
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def from_matrix(cls, sigma: np.ndarray, nu: float = 0.0) -> "WishartStats":
        """Build from a full matrix, rejecting any off-diagonal content."""
        mat = np.asarray(sigma, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"sigma must be a square matrix, got shape {mat.shape}")
        if np.any(mat != np.diag(np.diag(mat))):
            raise ValueError("sigma must be diagonal")
        return cls(sigma=np.diag(mat), nu=nu)

    def as_matrix(self) -> np.ndarray:
        return np.diag(self.sigma)


@dataclass(frozen=True, eq=False)
class AugmentedMatrices:
    """Block matrices acting on the augmented state of one time step.

    ``Cq`` reads the newest block of the pre-transition window; it is only set
    when the output matrix was given to ``build_transition``.
    """

    Aaug: np.ndarray
    Baug: np.ndarray
    Qaug: np.ndarray
    Cq: np.ndarray | None = None


# =============================================================================
# BUILDERS
# =============================================================================


def build_output_selector(w: int, offset: int, C: np.ndarray) -> np.ndarray:
    """Observation matrix reading block ``offset`` of a ``w``-block augmented state.

    Offset 1 selects the newest state x_k; offset w the oldest one in the window.
    """
    if w < 1:
        raise ValueError(f"window size must be >= 1, got {w}")
    if not 1 <= offset <= w:
        raise ValueError(f"offset must lie in 1..{w}, got {offset}")
    C = np.atleast_2d(np.asarray(C, dtype=float))
    return np.kron(np.eye(1, w, offset - 1), C)


def build_transition(
    w: int,
    l: int,  # noqa: E741
    A: np.ndarray,
    B: np.ndarray,
    Q: np.ndarray,
    C: np.ndarray | None = None,
) -> AugmentedMatrices:
    """Shift a ``w``-block window forward, keeping ``l`` of its blocks.

    ``l == w`` grows the window (k <= L); ``l == w - 1`` drops the oldest block
    (k > L), which marginalises it out of the belief.
    """
    if w < 1:
        raise ValueError(f"window size must be >= 1, got {w}")
    if l not in (w - 1, w):
        raise ValueError(f"l must be w-1 or w (w={w}), got {l}")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    n_x = A.shape[0]

    head = np.kron(np.eye(1, w), A)
    shift = np.kron(np.eye(l, w), np.eye(n_x))
    Aaug = np.vstack([head, shift])
    Baug = np.kron(np.eye(l + 1, 1), B)
    Qaug = np.kron(np.diag(np.eye(1, l + 1).ravel()), Q)
    Cq = None if C is None else build_output_selector(w, 1, C)
    return AugmentedMatrices(Aaug=Aaug, Baug=Baug, Qaug=Qaug, Cq=Cq)


def propagate(belief: GaussianStats, aug: AugmentedMatrices, u: np.ndarray) -> GaussianStats:
    """Time update X <- Aaug X + Baug u, P <- Aaug P Aaug' + Qaug."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if aug.Aaug.shape[1] != belief.dim:
        raise ValueError(
            f"transition expects a {aug.Aaug.shape[1]}-dim belief, got {belief.dim}"
        )
    if u.shape[0] != aug.Baug.shape[1]:
        raise ValueError(f"u must have {aug.Baug.shape[1]} entries, got {u.shape[0]}")
    if not np.all(np.isfinite(u)):
        raise ValueError("u contains non-finite entries")
    mean = aug.Aaug @ belief.mean + aug.Baug @ u
    cov = symmetrize(aug.Aaug @ belief.cov @ aug.Aaug.T + aug.Qaug)
    return GaussianStats(mean=mean, cov=cov)
