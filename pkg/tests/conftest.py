"""Test configuration and fixtures."""

import os
from unittest.mock import patch

import numpy as np
import pytest

from src.estimation import GaussianStats, StateSpaceModel, WishartStats
from src.experiments import load_bundled_scenario
from src.simulation import RngSpec, simulate_run


@pytest.fixture
def mock_env():
    """Mock environment variables for testing."""
    with patch.dict(os.environ, {"TFLIS_JOBS": "3", "TFLIS_LOG_LEVEL": "DEBUG"}):
        yield


@pytest.fixture
def pv_model():
    """Position-velocity system driven by a ±1 input."""
    return StateSpaceModel(
        A=[[1.0, 1.0], [0.0, 1.0]],
        B=[[0.5], [1.0]],
        C=np.eye(2),
        Q=1e-4 * np.array([[0.25, 0.5], [0.5, 1.0]]),
        R=1e-3 * np.eye(2),
    )


@pytest.fixture
def pv_prior():
    """Nearly flat prior over x_1."""
    return GaussianStats(mean=np.zeros(2), cov=1e7 * np.eye(2))


@pytest.fixture
def flat_wishart():
    return WishartStats(sigma=np.zeros(2), nu=0.0)


@pytest.fixture
def rng():
    """Seeded generator for randomized test inputs."""
    return np.random.default_rng(12345)


@pytest.fixture
def realization(pv_model):
    """One 50-step run with precise external data."""
    return simulate_run(pv_model, 2, 1e-3, RngSpec(2024, 0), 50)


@pytest.fixture
def small_config():
    """Bundled scenario shrunk to a few short runs."""
    config = load_bundled_scenario()
    return config.model_copy(
        update={"runs": 4, "horizon": 12, "r_E_grid": [1e-4, 1.0], "master_seed": 99}
    )
