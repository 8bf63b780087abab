"""Trial-level simulation of the two-hop transmission with cooperative jamming"""

import logging
import math
import multiprocessing as mp
import os
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from tqdm.auto import tqdm

from .channel import (
    NetworkConfig,
    Scheme,
    draw_realization,
    exponential_gains,
    jammer_set,
    select_best_relay,
    select_random_relay,
    sir,
    sir_many,
)

logger = logging.getLogger(__name__)


# Largest master seed accepted, so that seeds fit in 64 bits
MAX_SEED: int = 2**64 - 1


def default_n_jobs() -> int:
    """Worker count from `JAMTOL_N_JOBS`, falling back to all but one CPU"""
    value = os.getenv("JAMTOL_N_JOBS")
    if value:
        return max(int(value), 1)
    return max(mp.cpu_count() - 1, 1)


def default_chunksize() -> int:
    """Trials per pool task from `JAMTOL_CHUNKSIZE`, falling back to 1000"""
    value = os.getenv("JAMTOL_CHUNKSIZE")
    if value:
        return max(int(value), 1)
    return 1000


@dataclass(frozen=True)
class TrialOutcome:
    """Result of a single simulated transmission.

    Attributes:
        transmission_outage (bool):
            Whether the relay or the destination fails to decode.
        secrecy_outage (bool):
            Whether some eavesdropper decodes either hop.
        sir_phase1 (float):
            SIR at the selected relay.
        sir_phase2 (float):
            SIR at the destination.
        best_index (int):
            The index of the selected relay.
    """

    transmission_outage: bool
    secrecy_outage: bool
    sir_phase1: float
    sir_phase2: float
    best_index: int


@dataclass(frozen=True)
class OutageEstimate:
    """Empirical outage probability from exact integer counts.

    Args:
        outages (int):
            The number of trials in outage.
        trials (int):
            The number of trials, at least 1.

    Raises:
        ValueError:
            If the counts are inconsistent.
    """

    outages: int
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(
                f"An estimate needs at least one trial, got {self.trials}."
            )
        if not 0 <= self.outages <= self.trials:
            raise ValueError(
                f"Outage count {self.outages} must lie in [0, {self.trials}]."
            )

    @property
    def p_hat(self) -> float:
        return self.outages / self.trials

    @property
    def stderr(self) -> float:
        """Binomial standard error sqrt(p (1 - p) / trials)"""
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.trials)

    def to_dict(self) -> dict:
        return dict(
            p_hat=self.p_hat,
            stderr=self.stderr,
            trials=self.trials,
            outages=self.outages,
        )


@dataclass(frozen=True)
class SimJob:
    """A Monte-Carlo run.

    Args:
        config (NetworkConfig):
            The network scenario.
        scheme (Scheme or str):
            The relay selection scheme.
        trials (int, optional):
            The number of transmissions to simulate. Defaults to 100000.
        master_seed (int, optional):
            The seed every per-trial seed is derived from. Defaults to 0.

    Raises:
        ValueError:
            If `trials` is below 1 or the seed is not a 64-bit unsigned integer.
    """

    config: NetworkConfig
    scheme: Union[Scheme, str]
    trials: int = 100_000
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if self.trials < 1:
            raise ValueError(f"A job needs at least one trial, got {self.trials}.")
        if not 0 <= self.master_seed <= MAX_SEED:
            raise ValueError(
                f"The seed must be an unsigned 64-bit integer, got {self.master_seed}."
            )


def trial_seed(master_seed: int, trial_index: int) -> np.ndarray:
    """Philox key of a single trial.

    The key is a hash of the master seed and the trial index, so trials can be run in
    any order and on any worker.

    Args:
        master_seed (int):
            The seed of the job.
        trial_index (int):
            The index of the trial within the job.

    Returns:
        np.ndarray:
            Two 64-bit words, usable as `np.random.Philox(key=...)`.
    """
    sequence = np.random.SeedSequence([master_seed, trial_index])
    return sequence.generate_state(2, dtype=np.uint64)


def trial_generator(key: np.ndarray) -> np.random.Generator:
    """Counter-based generator for a trial key"""
    return np.random.Generator(np.random.Philox(key=key))


def run_trial(config: NetworkConfig, scheme: Union[Scheme, str], seed) -> TrialOutcome:
    """Simulate a single two-hop transmission.

    Args:
        config (NetworkConfig):
            The network scenario.
        scheme (Scheme or str):
            The relay selection scheme.
        seed (np.ndarray):
            The trial key, as returned by `trial_seed`.

    Returns:
        TrialOutcome:
            The outcome, fully determined by the arguments.
    """
    scheme = Scheme.parse(scheme)
    rng = trial_generator(seed)
    gains = draw_realization(config, rng)

    # Relay selection
    if scheme is Scheme.OPPORTUNISTIC:
        best = select_best_relay(gains.s_to_relay, gains.relay_to_d)
    else:
        best = select_random_relay(config.n, rng)

    # The relays jamming each hop, judged on their gains to that hop's receiver
    phase1_jammers = jammer_set(gains.jammer_to_best, best, config.tau)
    phase2_jammers = jammer_set(gains.relay_to_d, best, config.tau)

    sir_phase1 = sir(gains.s_to_relay[best], gains.jammer_to_best[phase1_jammers])
    sir_phase2 = sir(gains.relay_to_d[best], gains.relay_to_d[phase2_jammers])
    transmission_outage = sir_phase1 < config.gamma or sir_phase2 < config.gamma

    # An eavesdropper hears each hop through the noise of that hop's jammers
    eaves_phase1 = sir_many(
        gains.s_to_eaves, gains.jammer_to_eaves_phase1[phase1_jammers].sum(axis=0)
    )
    eaves_phase2 = sir_many(
        gains.best_to_eaves, gains.jammer_to_eaves_phase2[phase2_jammers].sum(axis=0)
    )
    secrecy_outage = bool(
        np.any(eaves_phase1 >= config.gamma_e) or np.any(eaves_phase2 >= config.gamma_e)
    )

    return TrialOutcome(
        transmission_outage=bool(transmission_outage),
        secrecy_outage=secrecy_outage,
        sir_phase1=float(sir_phase1),
        sir_phase2=float(sir_phase2),
        best_index=best,
    )


def _run_trial_range(
    args: Tuple[NetworkConfig, Scheme, int, int, int]
) -> Tuple[int, int]:
    """Outage counts of the trials with indices in [start, stop).

    Args:
        args (tuple):
            The network configuration, scheme, master seed, start and stop.

    Returns:
        pair of int:
            The transmission and secrecy outage counts.
    """
    config, scheme, master_seed, start, stop = args
    transmission_outages, secrecy_outages = 0, 0
    for trial_index in range(start, stop):
        outcome = run_trial(config, scheme, trial_seed(master_seed, trial_index))
        transmission_outages += outcome.transmission_outage
        secrecy_outages += outcome.secrecy_outage
    return transmission_outages, secrecy_outages


def estimate(
    job: SimJob,
    n_jobs: Optional[int] = None,
    chunksize: Optional[int] = None,
    verbose: bool = False,
) -> Tuple[OutageEstimate, OutageEstimate]:
    """Estimate the TOP and SOP of a scenario from simulated transmissions.

    Both estimates come from the same trials. The counts are exact integers and only
    depend on the job, never on `n_jobs` or `chunksize`.

    Args:
        job (SimJob):
            The run to perform.
        n_jobs (int or None, optional):
            The number of worker processes. If None then `JAMTOL_N_JOBS` is used, or all
            but one CPU. With a single job no pool is started. Defaults to None.
        chunksize (int or None, optional):
            The number of trials per pool task. If None then `JAMTOL_CHUNKSIZE` is used,
            or 1000. Defaults to None.
        verbose (bool, optional):
            Whether to log progress and show a progress bar. Defaults to False.

    Returns:
        pair of OutageEstimate:
            The TOP and SOP estimates.
    """
    if verbose:
        logger.setLevel(logging.INFO)
    else:
        logger.setLevel(logging.WARNING)

    n_jobs = default_n_jobs() if n_jobs is None else max(n_jobs, 1)
    chunksize = default_chunksize() if chunksize is None else max(chunksize, 1)

    # Contiguous trial index ranges, one per pool task
    ranges: List[Tuple[NetworkConfig, Scheme, int, int, int]] = [
        (
            job.config,
            job.scheme,
            job.master_seed,
            start,
            min(start + chunksize, job.trials),
        )
        for start in range(0, job.trials, chunksize)
    ]
    logger.info(
        f"Simulating {job.trials:,} {job.scheme.value} transmissions in "
        f"{len(ranges):,} chunks on {n_jobs} worker(s)"
    )

    transmission_outages, secrecy_outages = 0, 0
    with tqdm(total=job.trials, desc="Simulating", disable=not verbose) as pbar:
        if n_jobs == 1 or len(ranges) == 1:
            results = map(_run_trial_range, ranges)
            for (_, _, _, start, stop), (top_count, sop_count) in zip(ranges, results):
                transmission_outages += top_count
                secrecy_outages += sop_count
                pbar.update(stop - start)
        else:
            with mp.Pool(processes=n_jobs) as pool:
                results = pool.imap(_run_trial_range, ranges)
                for (_, _, _, start, stop), (top_count, sop_count) in zip(
                    ranges, results
                ):
                    transmission_outages += top_count
                    secrecy_outages += sop_count
                    pbar.update(stop - start)

    # Counts are summed in range order
    top = OutageEstimate(outages=transmission_outages, trials=job.trials)
    sop = OutageEstimate(outages=secrecy_outages, trials=job.trials)
    logger.info(
        f"Estimated TOP={top.p_hat:.5f} (+/- {top.stderr:.5f}) and "
        f"SOP={sop.p_hat:.5f} (+/- {sop.stderr:.5f})"
    )
    return top, sop


def estimate_interference_moments(
    n: int, tau: float, samples: int = 1_000_000, seed: int = 0, block: int = 100_000
) -> Tuple[float, float]:
    """Sample mean and standard deviation of the total jamming interference.

    Each sample sums the gains below `tau` among n - 1 unit-mean exponential draws,
    which is the interference seen by a legitimate receiver.

    Args:
        n (int):
            The number of relays.
        tau (float):
            The noise-generating threshold.
        samples (int, optional):
            The number of samples, at least 10000. Defaults to 1000000.
        seed (int, optional):
            The seed. Defaults to 0.
        block (int, optional):
            The number of samples drawn at a time. Defaults to 100000.

    Returns:
        pair of float:
            The sample mean and the sample standard deviation.

    Raises:
        ValueError:
            If `samples` is below 10000, `n` below 1 or `tau` negative.
    """
    if samples < 10_000:
        raise ValueError(f"At least 10000 samples are needed, got {samples}.")
    if n < 1:
        raise ValueError(f"The number of relays must be at least 1, got {n}.")
    if not tau >= 0:
        raise ValueError(f"tau must be non-negative, got {tau}.")
    if tau == 0 or n == 1:
        return 0.0, 0.0

    rng = trial_generator(trial_seed(seed, 0))
    sums: List[float] = []
    squares: List[float] = []
    remaining = samples
    while remaining > 0:
        size = min(block, remaining)
        gains = exponential_gains(rng, (size, n - 1))
        interference = np.where(gains < tau, gains, 0.0).sum(axis=1)
        sums.append(float(interference.sum()))
        squares.append(float(np.square(interference).sum()))
        remaining -= size

    mean = math.fsum(sums) / samples
    variance = (math.fsum(squares) - samples * mean * mean) / (samples - 1)
    return mean, math.sqrt(max(variance, 0.0))
