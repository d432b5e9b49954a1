"""Tests for SE/MSE scoring and Monte Carlo aggregation."""

import numpy as np
import pytest

from src.scoring import MethodScorer, aggregate, create_scorer, mse, se


def test_se_is_squared_distance():
    assert se(np.array([1.0, 2.0]), np.array([0.0, 0.0])) == 5.0
    assert se(np.zeros(3), np.zeros(3)) == 0.0
    with pytest.raises(ValueError, match="shape"):
        se(np.zeros(2), np.zeros(3))


def test_mse_averages_scored_steps():
    """Test MSE covers k = 1..horizon-L only."""
    series = [1.0, 2.0, 3.0, 100.0, 100.0]
    assert mse(series, lag=2, horizon=5) == pytest.approx(2.0)
    assert mse(series[:3], lag=2, horizon=5) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        mse(series[:2], lag=2, horizon=5)
    with pytest.raises(ValueError):
        mse(series, lag=5, horizon=5)


def test_aggregate_mean_and_standard_error():
    mean, stderr = aggregate([1.0, 2.0, 3.0, 4.0])
    assert mean == pytest.approx(2.5)
    assert stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)


def test_aggregate_single_run_has_zero_error():
    assert aggregate([3.0]) == (3.0, 0.0)
    with pytest.raises(ValueError):
        aggregate([])


def test_scorer_reduces_per_method():
    """Test the scorer summarizes and averages runs independently per method."""
    scorer = create_scorer(lag=1, horizon=4)
    assert isinstance(scorer, MethodScorer)
    scorer.add_run({"iKF": np.array([1.0, 1.0, 1.0]), "KF": np.array([0.0, 0.0, 0.0])})
    scorer.add_run({"iKF": np.array([3.0, 3.0, 3.0]), "KF": np.array([0.0, 2.0, 4.0])})

    assert scorer.run_count("iKF") == 2
    assert scorer.methods == ["iKF", "KF"]
    mean, stderr = scorer.summary("iKF")
    assert mean == pytest.approx(2.0)
    assert stderr == pytest.approx(1.0)
    np.testing.assert_allclose(scorer.per_step_mean("KF"), [0.0, 1.0, 2.0])


def test_scorer_rejects_short_series_and_unknown_methods():
    scorer = create_scorer(lag=2, horizon=5)
    with pytest.raises(ValueError):
        scorer.add_run({"iKF": np.ones(2)})
    with pytest.raises(KeyError):
        scorer.summary("FLS")
    with pytest.raises(ValueError):
        create_scorer(lag=3, horizon=3)
