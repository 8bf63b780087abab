"""Domain model of the two-hop relay network and its block Rayleigh fading channels"""

import enum
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)


class Scheme(str, enum.Enum):
    """Relay selection scheme"""

    OPPORTUNISTIC = "opportunistic"
    RANDOM = "random"

    @classmethod
    def parse(cls, value: Union[str, "Scheme"]) -> "Scheme":
        """Parse a scheme from its name.

        Args:
            value (str or Scheme):
                The scheme or its (case insensitive) name.

        Returns:
            Scheme:
                The parsed scheme.

        Raises:
            ValueError:
                If the name is not a known scheme.
        """
        if isinstance(value, Scheme):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(scheme.value for scheme in cls)
            raise ValueError(f"Unknown scheme {value!r}; expected one of {names}.")


@dataclass(frozen=True)
class NetworkConfig:
    """Parameters of one network scenario.

    Transmit power does not appear: the network is interference limited and the source
    and relays share the same power, so it cancels in every SIR.

    Args:
        n (int):
            The number of relays, at least 1.
        m (int):
            The number of eavesdroppers, at least 0.
        gamma (float):
            The SIR threshold of the legitimate receivers, positive.
        gamma_e (float):
            The SIR threshold of the eavesdroppers, positive.
        tau (float):
            The noise-generating threshold, non-negative.

    Raises:
        ValueError:
            If any parameter is out of range.
    """

    n: int
    m: int
    gamma: float
    gamma_e: float
    tau: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"The number of relays must be at least 1, got {self.n}.")
        if self.m < 0:
            raise ValueError(
                f"The number of eavesdroppers must be non-negative, got {self.m}."
            )
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}.")
        if not self.gamma_e > 0:
            raise ValueError(f"gamma_e must be positive, got {self.gamma_e}.")
        if not (self.tau >= 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be finite and non-negative, got {self.tau}.")

    @classmethod
    def from_rates(
        cls, n: int, m: int, rate: float, rate_e: float, tau: float
    ) -> "NetworkConfig":
        """Build a configuration from Wyner code rates.

        Args:
            n (int):
                The number of relays.
            m (int):
                The number of eavesdroppers.
            rate (float):
                The codeword rate R_t, in bits per channel use.
            rate_e (float):
                The rate difference R_e = R_t - R_s.
            tau (float):
                The noise-generating threshold.

        Returns:
            NetworkConfig:
                The configuration with thresholds 2^R_t - 1 and 2^R_e - 1.
        """
        return cls(
            n=n,
            m=m,
            gamma=rate_to_threshold(rate),
            gamma_e=rate_to_threshold(rate_e),
            tau=tau,
        )


@dataclass(frozen=True)
class ChannelRealization:
    """Channel gains of a single transmission (one fading block).

    Attributes:
        s_to_relay (np.ndarray):
            Shape (n,), gains from the source to each relay.
        relay_to_d (np.ndarray):
            Shape (n,), gains from each relay to the destination.
        jammer_to_best (np.ndarray):
            Shape (n,), gains from each relay to the selected relay. The entry of the
            selected relay itself is never read.
        s_to_eaves (np.ndarray):
            Shape (m,), gains from the source to each eavesdropper.
        best_to_eaves (np.ndarray):
            Shape (m,), gains from the selected relay to each eavesdropper.
        jammer_to_eaves_phase1 (np.ndarray):
            Shape (n, m), gains from each relay to each eavesdropper in the first hop.
        jammer_to_eaves_phase2 (np.ndarray):
            Shape (n, m), the same for the second hop, drawn independently.
    """

    s_to_relay: np.ndarray
    relay_to_d: np.ndarray
    jammer_to_best: np.ndarray
    s_to_eaves: np.ndarray
    best_to_eaves: np.ndarray
    jammer_to_eaves_phase1: np.ndarray
    jammer_to_eaves_phase2: np.ndarray

    @property
    def n(self) -> int:
        return len(self.s_to_relay)

    @property
    def m(self) -> int:
        return len(self.s_to_eaves)


def exponential_gains(rng: np.random.Generator, size) -> np.ndarray:
    """Unit-mean exponential channel gains by inverse CDF.

    Args:
        rng (np.random.Generator):
            The random number generator.
        size (int or tuple of int):
            The output shape.

    Returns:
        np.ndarray:
            Gains -ln(1 - u) with u uniform on [0, 1).
    """
    return -np.log1p(-rng.random(size))


def draw_realization(
    config: NetworkConfig, rng: np.random.Generator
) -> ChannelRealization:
    """Draw all channel gains of one transmission.

    The draws happen in a fixed order, so a generator in a given state always yields
    the same realization.

    Args:
        config (NetworkConfig):
            The network scenario.
        rng (np.random.Generator):
            The random number generator.

    Returns:
        ChannelRealization:
            The realization.
    """
    n, m = config.n, config.m
    return ChannelRealization(
        s_to_relay=exponential_gains(rng, n),
        relay_to_d=exponential_gains(rng, n),
        jammer_to_best=exponential_gains(rng, n),
        s_to_eaves=exponential_gains(rng, m),
        best_to_eaves=exponential_gains(rng, m),
        jammer_to_eaves_phase1=exponential_gains(rng, (n, m)),
        jammer_to_eaves_phase2=exponential_gains(rng, (n, m)),
    )


def select_best_relay(s_to_relay: Sequence[float], relay_to_d: Sequence[float]) -> int:
    """Index of the relay maximising min(|h_{S,R_j}|², |h_{R_j,D}|²).

    Ties go to the lowest index.

    Args:
        s_to_relay (sequence of float):
            Gains from the source to each relay.
        relay_to_d (sequence of float):
            Gains from each relay to the destination.

    Returns:
        int:
            The index of the selected relay.

    Raises:
        ValueError:
            If the vectors are empty or of different lengths.

    Example:
        >>> select_best_relay([3.0, 1.0], [2.0, 5.0])
        0
    """
    first_hop = np.asarray(s_to_relay, dtype=float)
    second_hop = np.asarray(relay_to_d, dtype=float)
    if first_hop.size == 0 or first_hop.shape != second_hop.shape:
        raise ValueError(
            "Relay selection needs two non-empty gain vectors of equal length, got "
            f"lengths {first_hop.size} and {second_hop.size}."
        )
    # np.argmax returns the first maximum
    return int(np.argmax(np.minimum(first_hop, second_hop)))


def select_random_relay(n: int, rng: np.random.Generator) -> int:
    """Index of a relay chosen uniformly at random.

    Args:
        n (int):
            The number of relays.
        rng (np.random.Generator):
            The random number generator.

    Returns:
        int:
            The index of the selected relay.
    """
    if n < 1:
        raise ValueError(f"Cannot select a relay among {n} relays.")
    return int(rng.integers(n))


def jammer_set(
    gains_to_receiver: Sequence[float], excluded: int, tau: float
) -> np.ndarray:
    """Indices of the relays that generate noise during a hop.

    A relay jams when its gain to the current legitimate receiver is strictly below
    `tau`. The selected relay never jams.

    Args:
        gains_to_receiver (sequence of float):
            Gains from each relay to the legitimate receiver of the hop.
        excluded (int):
            The index of the selected relay.
        tau (float):
            The noise-generating threshold.

    Returns:
        np.ndarray:
            The sorted jammer indices.

    Raises:
        ValueError:
            If `excluded` is out of range or `tau` is negative.

    Example:
        >>> jammer_set([0.05, 0.2, 0.09], excluded=0, tau=0.1).tolist()
        [2]
    """
    gains = np.asarray(gains_to_receiver, dtype=float)
    if not 0 <= excluded < gains.size:
        raise ValueError(f"Excluded relay {excluded} is out of range for {gains.size}.")
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}.")
    below = gains < tau
    below[excluded] = False
    return np.flatnonzero(below)


def sir(signal_gain: float, interferer_gains: Sequence[float]) -> float:
    """Signal-to-interference ratio at a receiver.

    A receiver without interference decodes anything, including a zero signal, so the
    ratio is infinite whenever the total interference is zero.

    Args:
        signal_gain (float):
            Gain of the wanted transmitter.
        interferer_gains (sequence of float):
            Gains of the jamming relays.

    Returns:
        float:
            The ratio, possibly `math.inf`.

    Raises:
        ValueError:
            If a gain is negative.
    """
    interference = float(np.sum(interferer_gains)) if len(interferer_gains) else 0.0
    if signal_gain < 0 or interference < 0:
        raise ValueError("Channel gains must be non-negative.")
    if interference == 0:
        return math.inf
    return signal_gain / interference


def sir_many(signal_gains: np.ndarray, interference: np.ndarray) -> np.ndarray:
    """Vectorised `sir` for many receivers with pre-summed interference.

    Args:
        signal_gains (np.ndarray):
            Signal gain at each receiver.
        interference (np.ndarray):
            Total interference at each receiver.

    Returns:
        np.ndarray:
            The ratios, infinite where the interference is zero.
    """
    signal_gains = np.asarray(signal_gains, dtype=float)
    interference = np.asarray(interference, dtype=float)
    out = np.full(np.broadcast(signal_gains, interference).shape, np.inf)
    return np.divide(signal_gains, interference, out=out, where=interference > 0)


def rate_to_threshold(rate: float) -> float:
    """SIR threshold 2^rate - 1 matching a code rate.

    Args:
        rate (float):
            The rate in bits per channel use, non-negative.

    Returns:
        float:
            The threshold.

    Raises:
        ValueError:
            If the rate is negative.

    Example:
        >>> rate_to_threshold(1.0)
        1.0
    """
    if not rate >= 0:
        raise ValueError(f"Rates must be non-negative, got {rate}.")
    return 2.0**rate - 1.0


def threshold_to_rate(threshold: float) -> float:
    """Code rate log2(1 + threshold) matching an SIR threshold.

    Args:
        threshold (float):
            The SIR threshold, non-negative.

    Returns:
        float:
            The rate in bits per channel use.
    """
    if not threshold >= 0:
        raise ValueError(f"Thresholds must be non-negative, got {threshold}.")
    return math.log1p(threshold) / math.log(2.0)
