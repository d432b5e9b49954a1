"""Ground-truth trajectories, target/external observations and the PRBS input.

Random streams
--------------
Every run owns one ``numpy.random.Generator`` backed by PCG64. Its seed is the
``numpy.random.SeedSequence`` with ``entropy=master_seed`` and
``spawn_key=(run_index,)``; SeedSequence hashes both into the 128-bit PCG64
state, so distinct (master_seed, run_index) pairs give independent streams no
matter which worker executes the run.

Draw order within a run (fixed so streams replay exactly):

1. x_1 ~ U[-0.05, 0.05]^n_x via ``Generator.uniform``;
2. the PRBS register seed, ``Generator.integers(1, 16)``;
3. for k = 1..horizon: process noise (n_x standard normals), target noise
   (n_y), external noise (n_y), all from ``Generator.standard_normal``
   (ziggurat method) and scaled by a lower-triangular Cholesky factor.
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.estimation.matmodel import StateSpaceModel

logger = logging.getLogger(__name__)

INITIAL_STATE_BOUND = 0.05
FACTOR_JITTER = 1e-18


@dataclass(frozen=True)
class RngSpec:
    """Identifies the random stream of one Monte Carlo run."""

    master_seed: int
    run_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.run_index < 0:
            raise ValueError(f"run_index must be >= 0, got {self.run_index}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.run_index,))
        return np.random.Generator(np.random.PCG64(seq))


class PrbsGenerator:
    """4-bit maximal-length Fibonacci LFSR, feedback polynomial x^4 + x^3 + 1.

    The output bit is the register's bit 4 (the bit about to be shifted out):
    1 maps to +1, 0 to -1. The sequence has period 15.
    """

    WIDTH = 4
    TAPS = (4, 3)
    MASK = (1 << WIDTH) - 1

    def __init__(self, seed: int):
        if not 0 < seed <= self.MASK:
            raise ValueError(f"PRBS seed must be a nonzero {self.WIDTH}-bit value, got {seed}")
        self.register = seed
        self.position = 0

    def __iter__(self):
        return self

    def __next__(self) -> int:
        out = (self.register >> (self.WIDTH - 1)) & 1
        feedback = 0
        for tap in self.TAPS:
            feedback ^= self.register >> (tap - 1)
        self.register = ((self.register << 1) | (feedback & 1)) & self.MASK
        self.position += 1
        return 1 if out else -1


def prbs_next(gen: PrbsGenerator) -> int:
    """Emit the next ±1 input value and advance the register."""
    return next(gen)


@dataclass(frozen=True, eq=False)
class Realization:
    """One simulated run: truth, inputs and both observation streams (row k-1 = time k)."""

    states: np.ndarray
    inputs: np.ndarray
    y_T: np.ndarray
    y_E: np.ndarray
    prbs_seed: int

    @property
    def horizon(self) -> int:
        return self.states.shape[0]


def noise_factor(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular G with G G' = cov (jittered for singular PSD matrices)."""
    cov = np.asarray(cov, dtype=float)
    if not np.any(cov):
        return np.zeros_like(cov)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        return np.linalg.cholesky(cov + FACTOR_JITTER * np.eye(cov.shape[0]))


def simulate_run(
    model: StateSpaceModel, lag: int, r_E: float, rng: RngSpec, horizon: int
) -> Realization:
    """
    Simulate one run of the target system with target and external observations.

    Args:
        model: Target state-space model
        lag: Smoothing lag the run will be scored with (horizon must exceed it)
        r_E: Variance of the external observation noise, N(C x_k, r_E I)
        rng: Random stream of this run
        horizon: Number of time steps k = 1..horizon

    Returns:
        Realization with ``horizon`` rows per sequence
    """
    if not np.isfinite(r_E) or r_E <= 0:
        raise ValueError(f"r_E must be > 0, got {r_E}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if lag < 0 or horizon <= lag:
        raise ValueError(f"horizon ({horizon}) must exceed the lag ({lag})")

    gen = rng.generator()
    n_x, n_u, n_y = model.n_x, model.n_u, model.n_y
    G_q = noise_factor(model.Q)
    G_r = np.sqrt(model.r_diag)
    g_e = np.sqrt(r_E)

    x = gen.uniform(-INITIAL_STATE_BOUND, INITIAL_STATE_BOUND, size=n_x)
    prbs_seed = int(gen.integers(1, PrbsGenerator.MASK + 1))
    prbs = PrbsGenerator(prbs_seed)

    states = np.empty((horizon, n_x))
    inputs = np.empty((horizon, n_u))
    y_T = np.empty((horizon, n_y))
    y_E = np.empty((horizon, n_y))
    for k in range(horizon):
        process = gen.standard_normal(n_x)
        target = gen.standard_normal(n_y)
        external = gen.standard_normal(n_y)

        states[k] = x
        inputs[k] = prbs_next(prbs)
        y_T[k] = model.C @ x + G_r * target
        y_E[k] = model.C @ x + g_e * external
        x = model.A @ x + model.B @ inputs[k] + G_q @ process

    logger.debug("simulated run %d (PRBS seed %d, r_E=%g)", rng.run_index, prbs_seed, r_E)
    return Realization(states=states, inputs=inputs, y_T=y_T, y_E=y_E, prbs_seed=prbs_seed)
