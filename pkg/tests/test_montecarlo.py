"""Unit tests for the `montecarlo` module."""

import math
from typing import List, Tuple

import numpy as np
import pytest

from jamtol.analytic import interference_approx, sop, top_opportunistic, top_random
from jamtol.channel import NetworkConfig, Scheme
from jamtol.montecarlo import (
    OutageEstimate,
    SimJob,
    estimate,
    estimate_interference_moments,
    run_trial,
    trial_seed,
)


def within(estimate: OutageEstimate, expected: float, slack: float = 0.0) -> bool:
    """Whether an estimate lies within four standard errors of a value"""
    return abs(estimate.p_hat - expected) <= 4 * estimate.stderr + slack


def within_exact(estimate: OutageEstimate, expected: float) -> bool:
    """Whether an estimate lies within four binomial standard errors of an exact value.

    The standard error is evaluated at the exact value rather than at the estimate.
    """
    stderr = math.sqrt(expected * (1 - expected) / estimate.trials)
    return abs(estimate.p_hat - expected) <= 4 * stderr + 1 / estimate.trials


def small_random_configs(count: int, seed: int) -> List[Tuple[int, float, float]]:
    """Small scenarios drawn at random, as (n, gamma, tau) triples"""
    rng = np.random.default_rng(seed)
    return [
        (
            int(rng.integers(2, 21)),
            float(np.round(10 ** rng.uniform(-1, 1), 3)),
            float(np.round(rng.uniform(0.01, 1.0), 3)),
        )
        for _ in range(count)
    ]


class TestSeeds:
    def test_deterministic(self):
        np.testing.assert_array_equal(trial_seed(42, 7), trial_seed(42, 7))

    def test_distinct_per_trial(self):
        keys = {tuple(trial_seed(42, index)) for index in range(1000)}
        assert len(keys) == 1000

    def test_distinct_per_master_seed(self):
        assert tuple(trial_seed(1, 0)) != tuple(trial_seed(2, 0))


class TestRunTrial:
    @pytest.fixture(scope="class")
    def config(self):
        yield NetworkConfig(n=6, m=5, gamma=10.0, gamma_e=0.5, tau=0.2)

    @pytest.mark.parametrize(
        argnames="scheme", argvalues=list(Scheme), ids=[s.value for s in Scheme]
    )
    def test_deterministic(self, config, scheme):
        key = trial_seed(42, 0)
        assert run_trial(config, scheme, key) == run_trial(config, scheme, key)

    @pytest.mark.parametrize(
        argnames="scheme", argvalues=list(Scheme), ids=[s.value for s in Scheme]
    )
    def test_outage_flags_follow_sirs(self, config, scheme):
        for index in range(200):
            outcome = run_trial(config, scheme, trial_seed(3, index))
            assert outcome.transmission_outage == (
                outcome.sir_phase1 < config.gamma or outcome.sir_phase2 < config.gamma
            )
            assert 0 <= outcome.best_index < config.n

    def test_no_eavesdroppers_no_secrecy_outage(self):
        config = NetworkConfig(n=6, m=0, gamma=10.0, gamma_e=0.5, tau=0.5)
        for index in range(100):
            assert not run_trial(config, "random", trial_seed(0, index)).secrecy_outage

    def test_no_threshold_no_transmission_outage(self):
        config = NetworkConfig(n=6, m=3, gamma=10.0, gamma_e=0.5, tau=0.0)
        for index in range(100):
            outcome = run_trial(config, "opportunistic", trial_seed(0, index))
            assert not outcome.transmission_outage
            assert outcome.sir_phase1 == math.inf
            assert outcome.sir_phase2 == math.inf
            assert outcome.secrecy_outage


class TestOutageEstimate:
    def test_stderr(self):
        estimate_ = OutageEstimate(outages=25, trials=100)
        assert estimate_.p_hat == 0.25
        assert estimate_.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 100))

    @pytest.mark.parametrize(
        argnames="outages, trials",
        argvalues=[(0, 0), (-1, 10), (11, 10)],
        ids=["no_trials", "negative_count", "count_above_trials"],
    )
    def test_invalid(self, outages, trials):
        with pytest.raises(ValueError):
            OutageEstimate(outages=outages, trials=trials)


class TestSimJob:
    @pytest.mark.parametrize(
        argnames="trials, master_seed",
        argvalues=[(0, 0), (10, -1), (10, 2**64)],
        ids=["no_trials", "negative_seed", "seed_too_large"],
    )
    def test_invalid(self, trials, master_seed):
        config = NetworkConfig(n=6, m=5, gamma=10.0, gamma_e=0.5, tau=0.2)
        with pytest.raises(ValueError):
            SimJob(config, "random", trials=trials, master_seed=master_seed)

    def test_scheme_is_parsed(self):
        config = NetworkConfig(n=6, m=5, gamma=10.0, gamma_e=0.5, tau=0.2)
        assert SimJob(config, "RANDOM").scheme is Scheme.RANDOM


class TestEstimate:
    @pytest.fixture(scope="class")
    def job(self):
        config = NetworkConfig(n=6, m=5, gamma=10.0, gamma_e=0.5, tau=0.2)
        yield SimJob(config, Scheme.OPPORTUNISTIC, trials=3000, master_seed=42)

    @pytest.fixture(scope="class")
    def serial(self, job):
        yield estimate(job, n_jobs=1, chunksize=job.trials)

    @pytest.mark.parametrize(
        argnames="n_jobs, chunksize",
        argvalues=[(1, 7), (2, 250), (3, 1000)],
        ids=["serial_small_chunks", "two_workers", "three_workers"],
    )
    def test_independent_of_parallelism(self, job, serial, n_jobs, chunksize):
        assert estimate(job, n_jobs=n_jobs, chunksize=chunksize) == serial

    def test_counts_are_exact(self, job, serial):
        top, sop_ = serial
        assert top.trials == sop_.trials == job.trials
        assert isinstance(top.outages, int)

    def test_single_trial(self):
        config = NetworkConfig(n=6, m=5, gamma=10.0, gamma_e=0.5, tau=0.2)
        job = SimJob(config, "random", trials=1, master_seed=7)
        top, sop_ = estimate(job, n_jobs=1)
        assert top.p_hat in {0.0, 1.0}
        assert sop_.p_hat in {0.0, 1.0}

    def test_random_scheme_top_is_exact(self):
        config = NetworkConfig(n=10, m=0, gamma=1.0, gamma_e=0.5, tau=0.5)
        top, _ = estimate(SimJob(config, "random", trials=20_000, master_seed=1))
        assert within(top, top_random(10, 1.0, 0.5))

    @pytest.mark.parametrize(
        argnames="scheme", argvalues=list(Scheme), ids=[s.value for s in Scheme]
    )
    def test_sop_matches_closed_form(self, scheme):
        config = NetworkConfig(n=10, m=3, gamma=10.0, gamma_e=0.5, tau=0.5)
        _, sop_est = estimate(SimJob(config, scheme, trials=20_000, master_seed=2))
        assert within(sop_est, sop(10, 3, 0.5, 0.5))

    @pytest.mark.parametrize(
        argnames="n", argvalues=[30, 50, 80], ids=lambda n: f"n={n}"
    )
    @pytest.mark.parametrize(
        argnames="m, tau",
        argvalues=[(100, 0.05), (100, 0.1), (500, 0.05)],
        ids=["m=100-tau=0.05", "m=100-tau=0.1", "m=500-tau=0.05"],
    )
    def test_sop_grid(self, n, m, tau):
        config = NetworkConfig(n=n, m=m, gamma=10.0, gamma_e=0.5, tau=tau)
        _, sop_est = estimate(SimJob(config, "random", trials=5000, master_seed=n + m))
        assert within_exact(sop_est, sop(n, m, tau, 0.5))

    @pytest.mark.parametrize(
        argnames="n, gamma, tau",
        argvalues=small_random_configs(count=20, seed=2024),
        ids=lambda value: f"{value}",
    )
    def test_random_scheme_top_small_networks(self, n, gamma, tau):
        config = NetworkConfig(n=n, m=0, gamma=gamma, gamma_e=0.5, tau=tau)
        top, _ = estimate(SimJob(config, "random", trials=10_000, master_seed=n))
        assert within_exact(top, top_random(n, gamma, tau))

    def test_opportunistic_top_large_network(self):
        config = NetworkConfig(n=80, m=0, gamma=10.0, gamma_e=0.5, tau=0.075)
        top, _ = estimate(SimJob(config, "opportunistic", trials=20_000, master_seed=3))
        assert within(top, 0.46626, slack=0.002)
        assert within(top, top_opportunistic(80, 10.0, 0.075), slack=0.006)

    def test_normal_approximation_gap_small_network(self):
        config = NetworkConfig(n=30, m=0, gamma=10.0, gamma_e=0.5, tau=0.075)
        top, _ = estimate(SimJob(config, "opportunistic", trials=20_000, master_seed=4))
        assert within(top, 0.10314, slack=0.002)
        assert top.p_hat - top_opportunistic(30, 10.0, 0.075) >= 0.02


class TestInterferenceMoments:
    def test_no_threshold(self):
        assert estimate_interference_moments(50, 0.0, samples=10_000) == (0.0, 0.0)

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            estimate_interference_moments(50, 0.1, samples=100)

    def test_matches_normal_approximation(self):
        mean, std = estimate_interference_moments(50, 0.1, samples=1_000_000, seed=5)
        approx = interference_approx(50, 0.1)
        assert mean == pytest.approx(approx.mu, rel=0.01)
        assert std == pytest.approx(approx.sigma, rel=0.02)
