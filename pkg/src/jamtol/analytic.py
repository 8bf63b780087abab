"""Closed-form transmission and secrecy outage probabilities"""

import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special, stats

from .channel import Scheme
from .specialfn import (
    QuadratureConfig,
    integrate_1d,
    normal_cdf,
    normal_pdf,
    phi_fn,
)

logger = logging.getLogger(__name__)


# Clamps up to this size are quadrature noise; anything larger points to a bug
CLAMP_TOLERANCE: float = 1e-6

# Half-width, in standard deviations, of the window the interference density is
# integrated over
NORMAL_WINDOW: float = 10.0


@dataclass(frozen=True)
class NormalApprox:
    """Normal approximation of the total interference at a legitimate receiver.

    The interference is the sum of the n - 1 gains that fall below tau. Its exact law
    is a point mass e^(-(n-1)tau) at zero plus a piecewise polynomial density on
    (0, (n-1)tau]; the central limit theorem replaces it by a normal density with the
    same mean and standard deviation.

    Attributes:
        mu (float):
            The mean of the interference.
        sigma (float):
            The standard deviation of the interference.
        support_hi (float):
            The largest possible interference, (n - 1) tau.
        atom_mass (float):
            The probability that no relay jams, e^(-(n-1)tau). Only for diagnostics.
    """

    mu: float
    sigma: float
    support_hi: float
    atom_mass: float

    def pdf(self, x: np.ndarray) -> np.ndarray:
        """The approximating normal density."""
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return normal_pdf(z) / self.sigma

    def cdf(self, x: np.ndarray) -> np.ndarray:
        """The approximating normal distribution function."""
        return normal_cdf((np.asarray(x, dtype=float) - self.mu) / self.sigma)


def _clamp_probability(value: float, label: str) -> float:
    """Clamp a computed probability to [0, 1], logging the size of the clamp.

    Args:
        value (float):
            The computed value.
        label (str):
            Name of the quantity, for the log message.

    Returns:
        float:
            The clamped value.
    """
    clamped = min(max(value, 0.0), 1.0)
    if clamped != value:
        excess = abs(clamped - value)
        if excess <= CLAMP_TOLERANCE:
            logger.debug(f"Clamped {label}={value!r} by {excess:.3g}")
        else:
            logger.warning(f"Clamped {label}={value!r} by {excess:.3g}")
    return clamped


def interference_approx(n: int, tau: float) -> NormalApprox:
    """Moments of the total interference caused by the jamming relays.

    Args:
        n (int):
            The number of relays. With a single relay nobody can jam and all moments
            are zero.
        tau (float):
            The noise-generating threshold.

    Returns:
        NormalApprox:
            The approximation.

    Raises:
        ValueError:
            If `n` is below 1 or `tau` is negative.

    Example:
        >>> interference_approx(10, 0.0)
        NormalApprox(mu=0.0, sigma=0.0, support_hi=0.0, atom_mass=1.0)
    """
    if n < 1:
        raise ValueError(f"The number of relays must be at least 1, got {n}.")
    if not tau >= 0:
        raise ValueError(f"tau must be non-negative, got {tau}.")

    jammers = n - 1
    if jammers == 0 or tau == 0:
        return NormalApprox(mu=0.0, sigma=0.0, support_hi=0.0, atom_mass=1.0)

    # Moments of a single jammer's contribution 1{g < tau} g with g ~ Exp(1): the
    # mean is P(2, tau) and the second moment 2 P(3, tau), with P the regularized
    # lower incomplete gamma function
    mean_one = float(special.gammainc(2, tau))
    var_one = 2.0 * float(special.gammainc(3, tau)) - mean_one**2

    return NormalApprox(
        mu=max(jammers * mean_one, 0.0),
        sigma=math.sqrt(max(jammers * var_one, 0.0)),
        support_hi=jammers * tau,
        atom_mass=math.exp(-jammers * tau),
    )


def _best_of_n(n: int, s: np.ndarray) -> np.ndarray:
    """(1 - e^(-2s))^n, the probability that no relay has min-gain above s"""
    return (-np.expm1(-2.0 * s)) ** n


def joint_best_tail(
    n: int, x: Union[float, np.ndarray], y: Union[float, np.ndarray]
) -> Union[float, np.ndarray]:
    """Joint tail of the selected relay's two gains.

    Computes P(|h_{S,R_b}|² >= x, |h_{R_b,D}|² >= y) when R_b maximises the smaller of
    its two gains among `n` relays.

    Args:
        n (int):
            The number of relays, at least 1.
        x (float or np.ndarray):
            Threshold on the first-hop gain, non-negative.
        y (float or np.ndarray):
            Threshold on the second-hop gain, non-negative.

    Returns:
        float or np.ndarray:
            The probability, symmetric in `x` and `y`.

    Raises:
        ValueError:
            If `n` is below 1 or a threshold is negative.
    """
    if n < 1:
        raise ValueError(f"The number of relays must be at least 1, got {n}.")
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    if not (np.all(x_arr >= 0) and np.all(y_arr >= 0)):
        raise ValueError(f"Gain thresholds must be non-negative, got x={x}, y={y}.")

    high = np.maximum(x_arr, y_arr)
    low = np.minimum(x_arr, y_arr)
    value = (
        1.0
        - _best_of_n(n, high)
        + n * np.exp(-high) * (phi_fn(n, low) - phi_fn(n, high))
    )
    value = np.clip(value, 0.0, 1.0)
    if np.ndim(value) == 0:
        return float(value)
    return value


def top_opportunistic(
    n: int,
    gamma: float,
    tau: float,
    cfg: QuadratureConfig = QuadratureConfig(),
    renormalize: bool = False,
) -> float:
    """Transmission outage probability with opportunistic relaying.

    The interference in each hop is replaced by its normal approximation, truncated to
    the window [max(0, mu - 10 sigma), min((n-1)tau, mu + 10 sigma)]. The density is
    not renormalised over the window unless `renormalize` is set, in which case it is
    divided by its mass on [0, (n-1)tau].

    Args:
        n (int):
            The number of relays.
        gamma (float):
            The SIR threshold of the legitimate receivers.
        tau (float):
            The noise-generating threshold.
        cfg (QuadratureConfig, optional):
            Tolerances of the outer integrals. Inner integrals use tolerances ten
            times tighter. Defaults to `QuadratureConfig()`.
        renormalize (bool, optional):
            Whether to renormalise the truncated interference density. Defaults to
            False.

    Returns:
        float:
            The probability.

    Raises:
        ValueError:
            If an argument is out of range.
        QuadratureError:
            If an integral fails to converge.
    """
    if n < 1:
        raise ValueError(f"The number of relays must be at least 1, got {n}.")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}.")
    if not tau >= 0:
        raise ValueError(f"tau must be non-negative, got {tau}.")

    approx = interference_approx(n, tau)
    if approx.sigma == 0.0:
        return 0.0

    # Integration window
    lo = max(0.0, approx.mu - NORMAL_WINDOW * approx.sigma)
    hi = min(approx.support_hi, approx.mu + NORMAL_WINDOW * approx.sigma)
    if hi <= lo:
        return 0.0

    inner_cfg = cfg.tighter()
    cdf_at_zero = float(approx.cdf(0.0))

    def g(x: np.ndarray) -> np.ndarray:
        """Probability that the selected relay fails a hop at interference x"""
        return _best_of_n(n, gamma * x) + n * np.exp(-gamma * x) * phi_fn(n, gamma * x)

    def first_integrand(x: np.ndarray) -> np.ndarray:
        return g(x) * approx.pdf(x) * (approx.cdf(x) - cdf_at_zero)

    def inner_integrand(y: np.ndarray) -> np.ndarray:
        return phi_fn(n, gamma * y) * approx.pdf(y)

    def inner(x: np.ndarray) -> np.ndarray:
        """Integrals of phi(n, gamma y) f(y) over y in [lo, x] for every x.

        The abscissae are sorted and the inner integral is accumulated piece by piece
        between consecutive abscissae, each piece to the tighter tolerance.
        """
        flat = np.ravel(x)
        order = np.argsort(flat)
        edges = np.concatenate([[lo], flat[order]])
        pieces = [
            integrate_1d(inner_integrand, a, b, inner_cfg)
            for a, b in zip(edges[:-1], edges[1:])
        ]
        values = np.empty_like(flat)
        values[order] = np.cumsum(pieces)
        return values.reshape(np.shape(x))

    def second_integrand(x: np.ndarray) -> np.ndarray:
        return n * np.exp(-gamma * x) * approx.pdf(x) * inner(x)

    # Outer integrals
    first = integrate_1d(first_integrand, lo, hi, cfg)
    second = integrate_1d(second_integrand, lo, hi, cfg)
    value = 2.0 * (first - second)

    # Renormalise the truncated density over [0, (n-1)tau]
    if renormalize:
        mass = float(approx.cdf(approx.support_hi)) - cdf_at_zero
        value /= mass * mass

    logger.debug(
        f"TOP(opportunistic, n={n}, gamma={gamma}, tau={tau}) = {value!r} from "
        f"window [{lo:.6g}, {hi:.6g}]"
    )
    return _clamp_probability(value, "top_opportunistic")


def _check_sop_args(m: int, n: int, tau: float, gamma_e: float):
    """Validate the arguments shared by the survivor function and the SOP"""
    if m < 0:
        raise ValueError(f"The number of eavesdroppers must be non-negative, got {m}.")
    if n < 1:
        raise ValueError(f"The number of relays must be at least 1, got {n}.")
    if not tau >= 0:
        raise ValueError(f"tau must be non-negative, got {tau}.")
    if not gamma_e > 0:
        raise ValueError(f"gamma_e must be positive, got {gamma_e}.")


def survivor_g(m: int, n: int, tau: float, gamma_e: float) -> float:
    """Probability that none of `m` eavesdroppers decodes a single hop.

    With c = 1 / (1 + gamma_e) and L ~ Binomial(n - 1, 1 - e^(-tau)) jammers, this is
    E[(1 - c^L)^m], summed directly over L with log-space weights. Every term is
    non-negative, so the sum stays accurate for very large `m`.

    Args:
        m (int):
            The number of eavesdroppers.
        n (int):
            The number of relays.
        tau (float):
            The noise-generating threshold.
        gamma_e (float):
            The SIR threshold of the eavesdroppers.

    Returns:
        float:
            The survivor probability G(m, n, tau), in [0, 1].

    Raises:
        ValueError:
            If an argument is out of range.

    Example:
        >>> round(survivor_g(1, 2, math.log(2.0), 1.0), 12)
        0.25
    """
    _check_sop_args(m, n, tau, gamma_e)
    if m == 0:
        return 1.0
    if tau == 0 or n == 1:
        return 0.0

    # L = 0 contributes (1 - 1)^m = 0, so only L >= 1 enters
    jammers = np.arange(1, n, dtype=float)
    p_jam = -math.expm1(-tau)
    log_c = -math.log1p(gamma_e)
    with np.errstate(divide="ignore"):
        log_weights = stats.binom.logpmf(jammers, n - 1, p_jam)
        log_survive = m * np.log1p(-np.exp(jammers * log_c))
        value = float(np.exp(special.logsumexp(log_weights + log_survive)))
    return _clamp_probability(value, "survivor_g")


def survivor_g_series(m: int, n: int, tau: float, gamma_e: float) -> float:
    """G(m, n, tau) through its alternating binomial expansion.

    Expands (1 - c^L)^m by the binomial theorem, including the k = 0 term:
    sum over k of C(m, k) (-1)^k [(1 - e^(-tau)) c^k + e^(-tau)]^(n-1). The terms
    alternate and grow like C(m, k), so the expansion loses all significance beyond
    m of about 30; use `survivor_g` instead.

    Args:
        m (int):
            The number of eavesdroppers.
        n (int):
            The number of relays.
        tau (float):
            The noise-generating threshold.
        gamma_e (float):
            The SIR threshold of the eavesdroppers.

    Returns:
        float:
            The survivor probability, unclamped.
    """
    _check_sop_args(m, n, tau, gamma_e)
    c = 1.0 / (1.0 + gamma_e)
    decay = math.exp(-tau)
    return math.fsum(
        math.comb(m, k) * (-1) ** k * ((1.0 - decay) * c**k + decay) ** (n - 1)
        for k in range(m + 1)
    )


def sop(n: int, m: int, tau: float, gamma_e: float) -> float:
    """Secrecy outage probability of the two-hop transmission.

    The eavesdroppers see both hops through independent, identically distributed
    channels, so the SOP is 1 - G². The relay selection scheme plays no part.

    Args:
        n (int):
            The number of relays.
        m (int):
            The number of eavesdroppers.
        tau (float):
            The noise-generating threshold.
        gamma_e (float):
            The SIR threshold of the eavesdroppers.

    Returns:
        float:
            The probability.

    Raises:
        ValueError:
            If an argument is out of range.

    Example:
        >>> sop(60, 0, 0.05, 0.5)
        0.0
    """
    survivor = survivor_g(m, n, tau, gamma_e)
    return _clamp_probability(1.0 - survivor * survivor, "sop")


def top_random(n: int, gamma: float, tau: float) -> float:
    """Transmission outage probability with random relay selection.

    The two hops are independent, so the result is exact.

    Args:
        n (int):
            The number of relays.
        gamma (float):
            The SIR threshold of the legitimate receivers.
        tau (float):
            The noise-generating threshold.

    Returns:
        float:
            The probability.

    Raises:
        ValueError:
            If an argument is out of range.

    Example:
        >>> top_random(10, 1.0, 0.0)
        0.0
    """
    if n < 1:
        raise ValueError(f"The number of relays must be at least 1, got {n}.")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}.")
    if not tau >= 0:
        raise ValueError(f"tau must be non-negative, got {tau}.")
    if tau == 0 or n == 1:
        return 0.0

    # Laplace transform of one jammer's contribution, evaluated at gamma
    base = math.exp(-tau) - math.expm1(-(1.0 + gamma) * tau) / (1.0 + gamma)
    value = -math.expm1((2 * n - 2) * math.log(base))
    return _clamp_probability(value, "top_random")


def top(
    scheme: Union[str, Scheme],
    n: int,
    gamma: float,
    tau: float,
    cfg: QuadratureConfig = QuadratureConfig(),
    renormalize: bool = False,
) -> float:
    """Transmission outage probability for either relay selection scheme.

    Args:
        scheme (str or Scheme):
            The relay selection scheme.
        n (int):
            The number of relays.
        gamma (float):
            The SIR threshold of the legitimate receivers.
        tau (float):
            The noise-generating threshold.
        cfg (QuadratureConfig, optional):
            Quadrature tolerances for the opportunistic scheme. Defaults to
            `QuadratureConfig()`.
        renormalize (bool, optional):
            Passed on to `top_opportunistic`. Defaults to False.

    Returns:
        float:
            The probability.
    """
    if Scheme.parse(scheme) is Scheme.OPPORTUNISTIC:
        return top_opportunistic(n, gamma, tau, cfg=cfg, renormalize=renormalize)
    return top_random(n, gamma, tau)
