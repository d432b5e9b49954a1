"""Oracle suites behind `tflis verify`.

Every suite compares the recursive estimators against an independent batch
computation (or a closed-form identity) and returns a ``SuiteResult``. A suite
that raises is reported as failed; nothing here propagates exceptions.
"""

import logging
from collections.abc import Callable

import numpy as np

from src.config import settings
from src.estimation.matmodel import is_covariance
from src.estimation.sdu import sequential_data_update
from src.estimation.smoother import (
    extract_filtered,
    flis_data_step,
    flis_init,
    flis_time_step,
)
from src.estimation.transfer import tflis_init, tflis_step
from src.experiments.oracles import (
    batch_posterior,
    random_spd,
    relative_error,
    textbook_kalman_filter,
    window_joint_posterior,
)
from src.experiments.runner import load_bundled_scenario
from src.models import SuiteResult, VerifyReport
from src.simulation.simgen import PrbsGenerator, Realization, RngSpec, simulate_run

logger = logging.getLogger(__name__)

SDU_TOL = 1e-9
WINDOW_TOL = 1e-8
KF_TOL = 1e-10
VERIFY_R_E = 1e-3


class _ErrorTracker:
    """Running maximum of relative errors against a tolerance."""

    def __init__(self, name: str, tolerance: float):
        self.name = name
        self.tolerance = tolerance
        self.checks = 0
        self.max_error = 0.0
        self.worst = ""

    def compare(self, label: str, actual: np.ndarray, expected: np.ndarray) -> None:
        error = relative_error(actual, expected)
        self.checks += 1
        if error > self.max_error or not np.isfinite(error):
            self.max_error = error
            self.worst = label

    def result(self) -> SuiteResult:
        passed = bool(np.isfinite(self.max_error) and self.max_error <= self.tolerance)
        detail = "" if passed else f"worst case: {self.worst}"
        return SuiteResult(
            name=self.name,
            passed=passed,
            checks=self.checks,
            max_error=self.max_error,
            tolerance=self.tolerance,
            detail=detail,
        )


def _bundled_realization(horizon: int) -> tuple:
    config = load_bundled_scenario()
    model = config.state_space()
    realization: Realization = simulate_run(
        model, 0, VERIFY_R_E, RngSpec(settings.verify_seed, 0), horizon
    )
    return config, model, realization


# =============================================================================
# SUITES
# =============================================================================


def check_sdu_batch_equivalence(instances: int | None = None) -> SuiteResult:
    """Sequential update vs information-form batch update on random instances."""
    tracker = _ErrorTracker("sdu_batch_equivalence", SDU_TOL)
    rng = np.random.default_rng(settings.verify_seed)
    for i in range(instances or settings.verify_instances):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(1, 5))
        S0 = random_spd(rng, n)
        mu0 = rng.standard_normal(n)
        H = rng.standard_normal((m, n))
        gamma = rng.uniform(1e-2, 10.0, size=m)
        z = rng.standard_normal(m)

        mu, S = sequential_data_update(mu0, S0, H, gamma, z)
        mu_ref, S_ref = batch_posterior(mu0, S0, H, gamma, z)
        tracker.compare(f"instance {i} mean (n={n}, m={m})", mu, mu_ref)
        tracker.compare(f"instance {i} covariance (n={n}, m={m})", S, S_ref)

        order = rng.permutation(m)
        mu_perm, S_perm = sequential_data_update(mu0, S0, H[order], gamma[order], z[order])
        tracker.compare(f"instance {i} row order", mu_perm, mu)
        tracker.compare(f"instance {i} row order covariance", S_perm, S)
    return tracker.result()


def check_window_joint(max_k: int = 6) -> SuiteResult:
    """No-transfer FLIS window belief vs the batch solve over the whole trajectory."""
    tracker = _ErrorTracker("window_joint", WINDOW_TOL)
    config, model, realization = _bundled_realization(max_k)
    prior = config.prior()
    state = flis_init(model, prior, config.lag)
    for t in range(max_k):
        k = t + 1
        posterior = flis_data_step(state, realization.y_T[t])
        mean_ref, cov_ref = window_joint_posterior(
            model, prior, realization.inputs, realization.y_T, k, config.lag
        )
        tracker.compare(f"k={k} mean", posterior.belief.mean, mean_ref)
        tracker.compare(f"k={k} covariance", posterior.belief.cov, cov_ref)
        state = flis_time_step(posterior, realization.inputs[t])
    return tracker.result()


def check_kf_degeneration(horizon: int = 50) -> SuiteResult:
    """FLIS with L=0 and TFLIS with N=0, L=0 both reduce to the Kalman filter."""
    tracker = _ErrorTracker("kf_degeneration", KF_TOL)
    config, model, realization = _bundled_realization(horizon)
    prior = config.prior()
    reference = textbook_kalman_filter(model, prior, realization.inputs, realization.y_T)

    flis = flis_init(model, prior, 0)
    tflis = tflis_init(model, prior, config.wishart_prior(), 0, n_iter=0)
    for t in range(horizon):
        mean_ref, cov_ref = reference[t]
        posterior = flis_data_step(flis, realization.y_T[t])
        tracker.compare(f"FLIS k={t + 1} mean", posterior.belief.mean, mean_ref)
        tracker.compare(f"FLIS k={t + 1} covariance", posterior.belief.cov, cov_ref)
        flis = flis_time_step(posterior, realization.inputs[t])

        tflis, output = tflis_step(
            tflis, realization.inputs[t], realization.y_T[t], realization.y_E[t]
        )
        tracker.compare(f"TFLIS k={t + 1} mean", output.reported.mean, mean_ref)
        tracker.compare(f"TFLIS k={t + 1} covariance", output.reported.cov, cov_ref)
    return tracker.result()


def check_marginal_consistency(horizon: int = 50) -> SuiteResult:
    """First block of the lagged FLIS belief equals the Kalman filter posterior."""
    tracker = _ErrorTracker("marginal_consistency", KF_TOL)
    config, model, realization = _bundled_realization(horizon)
    prior = config.prior()
    reference = textbook_kalman_filter(model, prior, realization.inputs, realization.y_T)

    state = flis_init(model, prior, config.lag)
    n_x = model.n_x
    for t in range(horizon):
        mean_ref, cov_ref = reference[t]
        posterior = flis_data_step(state, realization.y_T[t])
        tracker.compare(f"k={t + 1} mean", extract_filtered(posterior), mean_ref)
        tracker.compare(f"k={t + 1} covariance", posterior.belief.cov[:n_x, :n_x], cov_ref)
        state = flis_time_step(posterior, realization.inputs[t])
    return tracker.result()


def check_prbs_period() -> SuiteResult:
    """Every nonzero seed yields a balanced sequence of minimal period 15."""
    failures = []
    checks = 0
    for seed in range(1, 16):
        gen = PrbsGenerator(seed)
        registers = []
        bits = []
        for _ in range(30):
            registers.append(gen.register)
            bits.append(next(gen))
        checks += 1
        if bits[:15] != bits[15:]:
            failures.append(f"seed {seed}: sequence does not repeat after 15 steps")
        elif any(bits[:15] == bits[p : p + 15] for p in (1, 3, 5)):
            failures.append(f"seed {seed}: period shorter than 15")
        elif len(set(registers[:15])) != 15:
            failures.append(f"seed {seed}: register misses states")
        elif bits[:15].count(1) != 8:
            failures.append(f"seed {seed}: expected 8 ones per period")
    return SuiteResult(
        name="prbs_period",
        passed=not failures,
        checks=checks,
        detail="; ".join(failures),
    )


def check_transfer_identities(horizon: int = 50) -> SuiteResult:
    """Degrees of freedom, Σ-chain monotonicity, Ξ̄ divisor and PSD beliefs over a run."""
    config, model, realization = _bundled_realization(horizon)
    lag = config.lag
    nu0 = config.nu0
    state = tflis_init(
        model, config.prior(), config.wishart_prior(), lag, config.ivb_iterations
    )
    failures = []
    checks = 0
    max_error = 0.0

    for t in range(horizon):
        k = t + 1
        base = state.committed_sigma
        w = state.w
        state, output = tflis_step(
            state, realization.inputs[t], realization.y_T[t], realization.y_E[t]
        )
        checks += 1

        expected_nu = nu0 + max(k - lag, 0)
        if output.committed_sigma_next.nu != expected_nu:
            failures.append(f"k={k}: nu={output.committed_sigma_next.nu}, expected {expected_nu}")
        if output.xi_divisor != base.nu + w:
            failures.append(f"k={k}: divisor {output.xi_divisor} != {base.nu + w}")

        previous = base.sigma
        for sigma in output.sigma_chain:
            if np.any(sigma < previous):
                failures.append(f"k={k}: Σ chain decreases")
                break
            previous = sigma
        if output.sigma_chain:
            xi_ref = output.sigma_chain[-1] / output.xi_divisor
            max_error = max(max_error, relative_error(output.xi_bar, xi_ref))

        for label, belief in (("reported", output.reported), ("predicted", output.predicted)):
            if not is_covariance(belief.cov):
                failures.append(f"k={k}: {label} covariance not symmetric PSD")

    if max_error > KF_TOL:
        failures.append(f"Ξ̄ differs from the Σ chain mean by {max_error:.3g}")
    return SuiteResult(
        name="transfer_identities",
        passed=not failures,
        checks=checks,
        max_error=max_error,
        tolerance=KF_TOL,
        detail="; ".join(failures[:5]),
    )


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "sdu_batch_equivalence": check_sdu_batch_equivalence,
    "window_joint": check_window_joint,
    "kf_degeneration": check_kf_degeneration,
    "marginal_consistency": check_marginal_consistency,
    "prbs_period": check_prbs_period,
    "transfer_identities": check_transfer_identities,
}


def run_verify(suites: dict[str, Callable[[], SuiteResult]] | None = None) -> VerifyReport:
    """Run every oracle suite and collect the outcomes."""
    results = []
    for name, suite in (suites or SUITES).items():
        try:
            result = suite()
        except Exception as e:
            logger.exception("Suite %s raised", name)
            result = SuiteResult(name=name, passed=False, detail=f"{type(e).__name__}: {e}")
        logger.info("Suite %s: %s", name, "pass" if result.passed else "FAIL")
        results.append(result)
    return VerifyReport(suites=results)
