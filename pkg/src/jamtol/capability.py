"""Optimal noise-generating threshold and eavesdropper-tolerance capability"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Tuple, Union

from .analytic import survivor_g, top, top_random
from .channel import Scheme
from .specialfn import QuadratureConfig

logger = logging.getLogger(__name__)


# Search limits. Beyond e^(-50) no formula is sensitive to tau, and no physical
# scenario has more than a billion eavesdroppers
TAU_START: float = 1e-3
TAU_CAP: float = 50.0
M_CAP: int = 10**9

ROOT_TOL: float = 1e-9


@dataclass(frozen=True)
class Constraints:
    """Security and reliability constraints of the capability problem.

    Args:
        eps_t (float):
            The largest acceptable transmission outage probability, in [0, 1].
        eps_s (float):
            The largest acceptable secrecy outage probability, in [0, 1].

    Raises:
        ValueError:
            If a constraint lies outside [0, 1].
    """

    eps_t: float
    eps_s: float

    def __post_init__(self):
        for name in ("eps_t", "eps_s"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {value}.")

    def check_open(self):
        """Raise a `ValueError` unless both constraints lie strictly inside (0, 1)"""
        for name in ("eps_t", "eps_s"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError(f"{name} must lie strictly in (0, 1), got {value}.")


@dataclass(frozen=True)
class ThresholdSolution:
    """The noise-generating threshold at which the reliability constraint binds.

    Attributes:
        tau (float):
            The threshold, at most `TAU_CAP`.
        binding (bool):
            False when the TOP stays below the constraint all the way to `TAU_CAP`, in
            which case `tau` is the cap.
        top_at_tau (float):
            The TOP at `tau`.
    """

    tau: float
    binding: bool
    top_at_tau: float


@dataclass(frozen=True)
class CapabilityResult:
    """Solution of the capability problem for one scheme and scenario.

    Attributes:
        scheme (Scheme):
            The relay selection scheme.
        tau_opt (float):
            The noise-generating threshold used.
        m_star (int):
            The largest number of eavesdroppers meeting the security constraint.
        top_at_tau (float):
            The TOP at `tau_opt`, equal to eps_t when the constraint binds.
        g_at_mstar (float):
            G(m_star), at least sqrt(1 - eps_s).
        g_at_mstar_plus1 (float):
            G(m_star + 1), below sqrt(1 - eps_s) unless the search was capped.
        binding (bool):
            Whether the reliability constraint determined `tau_opt`.
        capped (bool):
            Whether `m_star` hit the search cap.
    """

    scheme: Scheme
    tau_opt: float
    m_star: int
    top_at_tau: float
    g_at_mstar: float
    g_at_mstar_plus1: float
    binding: bool
    capped: bool

    def to_dict(self) -> dict:
        record = asdict(self)
        record["scheme"] = self.scheme.value
        return record


@dataclass(frozen=True)
class TradeoffResult:
    """The reliability needed to tolerate a given number of eavesdroppers.

    Attributes:
        tau (float):
            The smallest threshold that keeps `target_m` eavesdroppers within the
            security constraint.
        eps_t (float):
            The TOP at `tau`, i.e. the smallest reliability constraint under which the
            capability reaches `target_m`.
        feasible (bool):
            False if not even `TAU_CAP` protects against `target_m` eavesdroppers.
    """

    tau: float
    eps_t: float
    feasible: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _solve_increasing(
    fn: Callable[[float], float], target: float, value_tol: float = ROOT_TOL
) -> Tuple[float, float, bool]:
    """Bracket the threshold at which an increasing function of tau reaches `target`.

    The function must lie below `target` at tau = 0. The bracket starts at
    [0, TAU_START] and doubles its upper end until it covers the crossing, then is
    bisected down to a width of `ROOT_TOL`.

    Args:
        fn (callable):
            The nondecreasing function of tau.
        target (float):
            The target value.
        value_tol (float, optional):
            Stop early once the function is within this distance of the target.
            Defaults to `ROOT_TOL`.

    Returns:
        triple:
            The bracket ends `lo` and `hi`, with fn(lo) <= target <= fn(hi) up to
            `value_tol`, and whether the crossing exists below `TAU_CAP`. If it does
            not, both ends equal `TAU_CAP`.
    """
    # Bracket the root by doubling
    lo, hi = 0.0, TAU_START
    while fn(hi) < target:
        if hi >= TAU_CAP:
            return TAU_CAP, TAU_CAP, False
        lo, hi = hi, min(2.0 * hi, TAU_CAP)

    # Bisect, keeping fn(lo) < target <= fn(hi)
    while hi - lo > ROOT_TOL:
        mid = 0.5 * (lo + hi)
        value = fn(mid)
        if abs(value - target) <= value_tol:
            return mid, mid, True
        if value < target:
            lo = mid
        else:
            hi = mid
    return lo, hi, True


def _check_eps(name: str, value: float):
    if not 0 < value < 1:
        raise ValueError(f"{name} must lie strictly in (0, 1), got {value}.")


def solve_tau_opportunistic(
    n: int,
    gamma: float,
    eps_t: float,
    cfg: QuadratureConfig = QuadratureConfig(),
    renormalize: bool = False,
) -> ThresholdSolution:
    """The threshold at which the opportunistic TOP equals `eps_t`.

    The TOP is nondecreasing in tau, so the largest threshold meeting the reliability
    constraint is found by bisection.

    Args:
        n (int):
            The number of relays.
        gamma (float):
            The SIR threshold of the legitimate receivers.
        eps_t (float):
            The reliability constraint, strictly between 0 and 1.
        cfg (QuadratureConfig, optional):
            Quadrature tolerances. Defaults to `QuadratureConfig()`.
        renormalize (bool, optional):
            Passed on to `top_opportunistic`. Defaults to False.

    Returns:
        ThresholdSolution:
            The threshold, with `binding=False` at the cap when the TOP never
            reaches `eps_t`.

    Raises:
        ValueError:
            If an argument is out of range.
        QuadratureError:
            If a TOP evaluation fails to converge.
    """
    _check_eps("eps_t", eps_t)

    def outage(tau: float) -> float:
        return top(
            Scheme.OPPORTUNISTIC, n, gamma, tau, cfg=cfg, renormalize=renormalize
        )

    lo, _, binding = _solve_increasing(outage, eps_t)
    solution = ThresholdSolution(tau=lo, binding=binding, top_at_tau=outage(lo))
    if not binding:
        logger.info(
            f"The reliability constraint eps_t={eps_t} never binds for n={n}, "
            f"gamma={gamma}; jamming at tau={TAU_CAP}"
        )
    return solution


def solve_tau_random(n: int, gamma: float, eps_t: float) -> ThresholdSolution:
    """The threshold at which the random-selection TOP equals `eps_t`.

    The TOP equals eps_t exactly when
    e^(-tau) + (1 - e^(-(1+gamma)tau)) / (1 + gamma) = (1 - eps_t)^(1/(2n-2)). The left
    side decreases from 1 towards 1 / (1 + gamma), so there is no root when the right
    side is at or below that limit.

    Args:
        n (int):
            The number of relays, at least 2.
        gamma (float):
            The SIR threshold of the legitimate receivers.
        eps_t (float):
            The reliability constraint, strictly between 0 and 1.

    Returns:
        ThresholdSolution:
            The threshold, with `binding=False` at the cap when there is no root.

    Raises:
        ValueError:
            If an argument is out of range.

    Example:
        >>> solve_tau_random(2, 1.0, 0.9).binding
        False
    """
    _check_eps("eps_t", eps_t)
    if n < 2:
        raise ValueError(f"Jamming needs at least 2 relays, got {n}.")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}.")

    target = (1.0 - eps_t) ** (1.0 / (2 * n - 2))
    if target <= 1.0 / (1.0 + gamma):
        return ThresholdSolution(
            tau=TAU_CAP, binding=False, top_at_tau=top_random(n, gamma, TAU_CAP)
        )

    lo, _, binding = _solve_increasing(lambda tau: top_random(n, gamma, tau), eps_t)
    return ThresholdSolution(
        tau=lo, binding=binding, top_at_tau=top_random(n, gamma, lo)
    )


def max_tolerable(
    n: int, tau: float, gamma_e: float, eps_s: float, cap: int = M_CAP
) -> int:
    """The largest number of eavesdroppers meeting the security constraint at `tau`.

    G is strictly decreasing in m, so the answer is bracketed by doubling m and then
    found by binary search.

    Args:
        n (int):
            The number of relays.
        tau (float):
            The noise-generating threshold.
        gamma_e (float):
            The SIR threshold of the eavesdroppers.
        eps_s (float):
            The security constraint, strictly between 0 and 1.
        cap (int, optional):
            The largest count searched. Defaults to `M_CAP`.

    Returns:
        int:
            The largest m with G(m, n, tau) >= sqrt(1 - eps_s). Equal to `cap` when the
            search was capped.

    Raises:
        ValueError:
            If an argument is out of range.

    Example:
        >>> max_tolerable(50, 0.0, 0.5, 0.1)
        0
    """
    _check_eps("eps_s", eps_s)
    if not tau >= 0:
        raise ValueError(f"tau must be non-negative, got {tau}.")
    if cap < 1:
        raise ValueError(f"The search cap must be at least 1, got {cap}.")

    target = math.sqrt(1.0 - eps_s)

    def tolerates(m: int) -> bool:
        return survivor_g(m, n, tau, gamma_e) >= target

    if tau == 0 or not tolerates(1):
        return 0

    # Double until G drops below the target
    good = 1
    while True:
        candidate = min(2 * good, cap)
        if candidate == good:
            logger.warning(f"The eavesdropper search hit its cap of {cap:,}")
            return cap
        if not tolerates(candidate):
            bad = candidate
            break
        good = candidate

    # Bisect, keeping G(good) >= target > G(bad)
    while bad - good > 1:
        mid = (good + bad) // 2
        if tolerates(mid):
            good = mid
        else:
            bad = mid
    return good


def capability(
    scheme: Union[Scheme, str],
    n: int,
    gamma: float,
    gamma_e: float,
    constraints: Constraints,
    cfg: QuadratureConfig = QuadratureConfig(),
    tau_override: Optional[float] = None,
    renormalize: bool = False,
) -> CapabilityResult:
    """The eavesdropper-tolerance capability of a scenario.

    The number of tolerable eavesdroppers grows with tau while the TOP does too, so the
    capability is reached at the largest threshold meeting the reliability constraint.

    Args:
        scheme (Scheme or str):
            The relay selection scheme.
        n (int):
            The number of relays.
        gamma (float):
            The SIR threshold of the legitimate receivers.
        gamma_e (float):
            The SIR threshold of the eavesdroppers.
        constraints (Constraints):
            The reliability and security constraints, strictly inside (0, 1).
        cfg (QuadratureConfig, optional):
            Quadrature tolerances for the opportunistic TOP. Defaults to
            `QuadratureConfig()`.
        tau_override (float or None, optional):
            Evaluate the number of tolerable eavesdroppers at this threshold instead of
            the optimal one. Defaults to None.
        renormalize (bool, optional):
            Passed on to `top_opportunistic`. Defaults to False.

    Returns:
        CapabilityResult:
            The capability and its diagnostics.

    Raises:
        ValueError:
            If an argument is out of range.
        QuadratureError:
            If a TOP evaluation fails to converge.
    """
    scheme = Scheme.parse(scheme)
    constraints.check_open()

    if tau_override is not None:
        if not tau_override >= 0:
            raise ValueError(f"tau_override must be non-negative, got {tau_override}.")
        solution = ThresholdSolution(
            tau=float(tau_override),
            binding=False,
            top_at_tau=top(scheme, n, gamma, tau_override, cfg, renormalize),
        )
    elif scheme is Scheme.OPPORTUNISTIC:
        solution = solve_tau_opportunistic(
            n, gamma, constraints.eps_t, cfg=cfg, renormalize=renormalize
        )
    else:
        solution = solve_tau_random(n, gamma, constraints.eps_t)

    m_star = max_tolerable(n, solution.tau, gamma_e, constraints.eps_s)
    result = CapabilityResult(
        scheme=scheme,
        tau_opt=solution.tau,
        m_star=m_star,
        top_at_tau=solution.top_at_tau,
        g_at_mstar=survivor_g(m_star, n, solution.tau, gamma_e),
        g_at_mstar_plus1=survivor_g(m_star + 1, n, solution.tau, gamma_e),
        binding=solution.binding,
        capped=m_star == M_CAP,
    )
    logger.info(
        f"Capability of {scheme.value} relaying with n={n}: m*={m_star:,} at "
        f"tau={solution.tau:.6g}"
    )
    return result


def required_eps_t(
    scheme: Union[Scheme, str],
    n: int,
    gamma: float,
    gamma_e: float,
    eps_s: float,
    target_m: int,
    cfg: QuadratureConfig = QuadratureConfig(),
) -> TradeoffResult:
    """The smallest reliability constraint under which `target_m` eavesdroppers are
    tolerated.

    Finds the smallest tau with G(target_m, n, tau) >= sqrt(1 - eps_s); the TOP at that
    threshold is the reliability that has to be given up.

    Args:
        scheme (Scheme or str):
            The relay selection scheme.
        n (int):
            The number of relays.
        gamma (float):
            The SIR threshold of the legitimate receivers.
        gamma_e (float):
            The SIR threshold of the eavesdroppers.
        eps_s (float):
            The security constraint, strictly between 0 and 1.
        target_m (int):
            The number of eavesdroppers to tolerate, at least 1.
        cfg (QuadratureConfig, optional):
            Quadrature tolerances for the opportunistic TOP. Defaults to
            `QuadratureConfig()`.

    Returns:
        TradeoffResult:
            The threshold and the matching reliability constraint.

    Raises:
        ValueError:
            If an argument is out of range.
    """
    scheme = Scheme.parse(scheme)
    _check_eps("eps_s", eps_s)
    if target_m < 1:
        raise ValueError(f"target_m must be at least 1, got {target_m}.")

    target = math.sqrt(1.0 - eps_s)
    _, hi, feasible = _solve_increasing(
        lambda tau: survivor_g(target_m, n, tau, gamma_e), target, value_tol=0.0
    )
    return TradeoffResult(
        tau=hi, eps_t=top(scheme, n, gamma, hi, cfg), feasible=feasible
    )
