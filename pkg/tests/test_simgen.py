"""Tests for simulation: random streams, PRBS input and observations."""

import numpy as np
import pytest

from src.simulation import PrbsGenerator, RngSpec, noise_factor, prbs_next, simulate_run


@pytest.mark.parametrize("seed", range(1, 16))
def test_prbs_has_period_fifteen(seed):
    """Test every nonzero register seed gives a balanced period-15 sequence."""
    gen = PrbsGenerator(seed)
    values = [prbs_next(gen) for _ in range(45)]
    assert values[:15] == values[15:30] == values[30:]
    assert all(values[:15] != values[p : p + 15] for p in (1, 3, 5))
    assert values[:15].count(1) == 8
    assert set(values) == {-1, 1}
    assert gen.position == 45


def test_prbs_output_is_top_bit_before_shift():
    gen = PrbsGenerator(0b1000)
    assert next(gen) == 1
    assert gen.register == 0b0001
    assert next(gen) == -1


@pytest.mark.parametrize("seed", [0, 16, -1])
def test_prbs_rejects_invalid_seed(seed):
    with pytest.raises(ValueError):
        PrbsGenerator(seed)


def test_rng_spec_validates():
    with pytest.raises(ValueError):
        RngSpec(-1)
    with pytest.raises(ValueError):
        RngSpec(2**64)
    with pytest.raises(ValueError):
        RngSpec(1, -1)


def test_streams_are_reproducible_and_distinct():
    """Test identical (seed, run) pairs replay and different runs differ."""
    a = RngSpec(42, 3).generator().standard_normal(5)
    b = RngSpec(42, 3).generator().standard_normal(5)
    c = RngSpec(42, 4).generator().standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_simulation_shapes_and_replay(pv_model):
    run = simulate_run(pv_model, 2, 1e-3, RngSpec(5, 1), 30)
    again = simulate_run(pv_model, 2, 1e-3, RngSpec(5, 1), 30)
    assert run.horizon == 30
    assert run.states.shape == (30, 2)
    assert run.inputs.shape == (30, 1)
    assert run.y_T.shape == run.y_E.shape == (30, 2)
    assert 1 <= run.prbs_seed <= 15
    np.testing.assert_array_equal(run.y_E, again.y_E)


def test_simulation_follows_dynamics(pv_model):
    """Test the truth obeys x_{k+1} = A x_k + B u_k + process noise of the right rank."""
    run = simulate_run(pv_model, 2, 1e-3, RngSpec(11, 0), 50)
    assert np.all(np.abs(run.states[0]) <= 0.05)
    assert set(np.unique(run.inputs)) <= {-1.0, 1.0}

    residual = run.states[1:] - run.states[:-1] @ pv_model.A.T - run.inputs[:-1] @ pv_model.B.T
    # Q = 1e-4 [0.5, 1]' [0.5, 1]: the noise is parallel to [0.5, 1]
    np.testing.assert_allclose(residual[:, 0], 0.5 * residual[:, 1], atol=1e-8)


def test_inputs_follow_prbs(pv_model):
    run = simulate_run(pv_model, 0, 1e-3, RngSpec(3, 2), 20)
    gen = PrbsGenerator(run.prbs_seed)
    np.testing.assert_array_equal(run.inputs[:, 0], [prbs_next(gen) for _ in range(20)])


def test_external_noise_scales_with_r_e(pv_model):
    """Test the external residual variance tracks r_E."""
    precise = simulate_run(pv_model, 0, 1e-6, RngSpec(8, 0), 2000)
    coarse = simulate_run(pv_model, 0, 1.0, RngSpec(8, 0), 2000)
    assert np.var(precise.y_E - precise.states) == pytest.approx(1e-6, rel=0.15)
    assert np.var(coarse.y_E - coarse.states) == pytest.approx(1.0, rel=0.15)


def _assert_covariance_close(samples, expected, rel=0.05):
    sample_cov = np.cov(samples, rowvar=False)
    scale = np.sqrt(np.outer(np.diag(expected), np.diag(expected)))
    # Zero entries of ``expected`` are compared against the matching variances
    bound = rel * np.where(expected != 0, np.abs(expected), scale)
    np.testing.assert_array_less(np.abs(sample_cov - expected), bound)


def test_noise_moments_over_many_draws(pv_model):
    """Test sample covariances of all three noise sources over 10^5 steps."""
    r_E = 1e-2
    run = simulate_run(pv_model, 0, r_E, RngSpec(404, 0), 100_000)

    process = run.states[1:] - run.states[:-1] @ pv_model.A.T - run.inputs[:-1] @ pv_model.B.T
    _assert_covariance_close(process, pv_model.Q)
    _assert_covariance_close(run.y_T - run.states @ pv_model.C.T, pv_model.R)
    _assert_covariance_close(run.y_E - run.states @ pv_model.C.T, r_E * np.eye(pv_model.n_y))


@pytest.mark.parametrize(
    "lag, r_e, horizon", [(2, 0.0, 10), (2, np.inf, 10), (2, 1e-3, 0), (5, 1e-3, 5)]
)
def test_simulation_rejects_bad_arguments(pv_model, lag, r_e, horizon):
    with pytest.raises(ValueError):
        simulate_run(pv_model, lag, r_e, RngSpec(1), horizon)


def test_noise_factor():
    """Test the factor reproduces the covariance, including singular and zero cases."""
    Q = 1e-4 * np.array([[0.25, 0.5], [0.5, 1.0]])
    G = noise_factor(Q)
    np.testing.assert_allclose(G @ G.T, Q, atol=1e-15)
    np.testing.assert_array_equal(noise_factor(np.zeros((2, 2))), np.zeros((2, 2)))
    G = noise_factor(np.diag([4.0, 9.0]))
    np.testing.assert_allclose(G, np.diag([2.0, 3.0]))
