"""Scalar special functions and quadrature used by the closed-form outage models"""

import heapq
import logging
from dataclasses import dataclass
from typing import Callable, List, Tuple, Union

import numpy as np
from scipy import special

logger = logging.getLogger(__name__)


ArrayLike = Union[float, np.ndarray]


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature does not reach its tolerance.

    Args:
        message (str):
            Description of the failure.
        estimate (float):
            The best estimate of the integral at the time of failure.
        error_bound (float):
            The estimated absolute error of `estimate`.
        panels (int):
            The number of panels used.
    """

    def __init__(self, message: str, estimate: float, error_bound: float, panels: int):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
        self.panels = panels

    def to_dict(self) -> dict:
        """Diagnostics of the failure, for JSON records.

        Returns:
            dict:
                The message, estimate, error bound and panel count.
        """
        return dict(
            error=str(self),
            estimate=self.estimate,
            error_bound=self.error_bound,
            panels=self.panels,
        )


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances of the adaptive Gauss-Legendre quadrature.

    Args:
        rel_tol (float, optional):
            Relative tolerance on the integral. Defaults to 1e-8.
        abs_tol (float, optional):
            Absolute tolerance on the integral. Defaults to 1e-12.
        max_panels (int, optional):
            Maximum number of panels the interval may be split into. Defaults to 4096.
        panel_order (int, optional):
            Number of Gauss-Legendre nodes per panel. Defaults to 16.

    Raises:
        ValueError:
            If a tolerance is not positive or `max_panels` or `panel_order` is below 1.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_panels: int = 4096
    panel_order: int = 16

    def __post_init__(self):
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise ValueError(
                f"Quadrature tolerances must be positive, got rel_tol={self.rel_tol} "
                f"and abs_tol={self.abs_tol}."
            )
        if self.max_panels < 1:
            raise ValueError(f"max_panels must be at least 1, got {self.max_panels}.")
        if self.panel_order < 1:
            raise ValueError(f"panel_order must be at least 1, got {self.panel_order}.")

    def tighter(self, factor: float = 10.0) -> "QuadratureConfig":
        """A copy of the configuration with tolerances divided by `factor`.

        Args:
            factor (float, optional):
                The tightening factor. Defaults to 10.

        Returns:
            QuadratureConfig:
                The tightened configuration.
        """
        return QuadratureConfig(
            rel_tol=self.rel_tol / factor,
            abs_tol=self.abs_tol / factor,
            max_panels=self.max_panels,
            panel_order=self.panel_order,
        )


def normal_cdf(x: ArrayLike) -> ArrayLike:
    """The standard normal cumulative distribution function.

    Args:
        x (float or np.ndarray):
            The argument(s).

    Returns:
        float or np.ndarray:
            The value(s) of the standard normal CDF.

    Example:
        >>> float(normal_cdf(0.0))
        0.5
    """
    return special.ndtr(x)


def normal_pdf(x: ArrayLike) -> ArrayLike:
    """The standard normal probability density function.

    Args:
        x (float or np.ndarray):
            The argument(s).

    Returns:
        float or np.ndarray:
            The value(s) of the standard normal density.
    """
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)


def log_gamma(x: ArrayLike) -> ArrayLike:
    """The natural logarithm of the gamma function.

    Args:
        x (float or np.ndarray):
            Positive argument(s).

    Returns:
        float or np.ndarray:
            ln Γ(x).

    Raises:
        ValueError:
            If any argument is not positive.
    """
    if np.any(np.asarray(x) <= 0):
        raise ValueError(f"log_gamma is only defined for positive arguments, got {x}.")
    return special.gammaln(x)


def log_beta(a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """The natural logarithm of the beta function B(a, b).

    Args:
        a (float or np.ndarray):
            First positive parameter.
        b (float or np.ndarray):
            Second positive parameter.

    Returns:
        float or np.ndarray:
            ln B(a, b).

    Raises:
        ValueError:
            If a parameter is not positive.
    """
    return log_gamma(a) + log_gamma(b) - log_gamma(np.add(a, b))


def reg_inc_beta(a: float, b: float, x: ArrayLike) -> ArrayLike:
    """The regularised incomplete beta function I_x(a, b).

    Args:
        a (float):
            First positive parameter.
        b (float):
            Second positive parameter.
        x (float or np.ndarray):
            The upper integration limit(s), in [0, 1].

    Returns:
        float or np.ndarray:
            I_x(a, b), in [0, 1].

    Raises:
        ValueError:
            If `a` or `b` is not positive, or `x` lies outside [0, 1].
    """
    if not a > 0 or not b > 0:
        raise ValueError(f"Beta parameters must be positive, got a={a} and b={b}.")
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(x_arr)) or np.any(x_arr < 0) or np.any(x_arr > 1):
        raise ValueError(f"The argument of I_x(a, b) must lie in [0, 1], got {x}.")
    return special.betainc(a, b, x)


def phi_fn(n: int, x: ArrayLike) -> ArrayLike:
    """The integral of (1 - t²)^(n-1) over [0, e^(-x)].

    This equals e^(-x) 2F1(1/2, 1 - n; 3/2; e^(-2x)). The hypergeometric series is
    alternating and cancels catastrophically for large `n`, so the value is computed
    through the substitution u = t², which gives B(1/2, n) I_{z²}(1/2, n) / 2 with
    z = e^(-x).

    Args:
        n (int):
            The number of relays, at least 1.
        x (float or np.ndarray):
            Non-negative argument(s).

    Returns:
        float or np.ndarray:
            The value(s), each in [0, e^(-x)].

    Raises:
        ValueError:
            If `n` is below 1 or any `x` is negative.

    Example:
        >>> round(float(phi_fn(2, 0.0)), 12)
        0.666666666667
    """
    if n < 1:
        raise ValueError(f"phi_fn requires n >= 1, got n={n}.")
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(x_arr)) or np.any(x_arr < 0):
        raise ValueError(f"phi_fn requires x >= 0, got x={x}.")

    z_squared = np.exp(-2.0 * x_arr)
    half_beta = 0.5 * np.exp(log_beta(0.5, float(n)))
    value = half_beta * special.betainc(0.5, float(n), z_squared)
    if np.ndim(value) == 0:
        return float(value)
    return value


def _gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1].

    Args:
        order (int):
            The number of nodes.

    Returns:
        pair of np.ndarray:
            The nodes and the weights.
    """
    return np.polynomial.legendre.leggauss(order)


def _panel(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    nodes: np.ndarray,
    weights: np.ndarray,
) -> float:
    """Gauss-Legendre estimate of the integral of `f` over a single panel"""
    half_width = 0.5 * (hi - lo)
    midpoint = 0.5 * (hi + lo)
    values = np.asarray(f(midpoint + half_width * nodes), dtype=float)
    return float(half_width * np.dot(weights, values))


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    cfg: QuadratureConfig = QuadratureConfig(),
) -> float:
    """Adaptive Gauss-Legendre quadrature of a vectorised integrand.

    Each panel is integrated once as a whole and once as two halves; the difference
    between the two levels is the panel's error estimate. The panel with the largest
    error is halved until the summed error meets the tolerance.

    Args:
        f (callable):
            The integrand. It is called with a NumPy array of abscissae and must
            return an array of the same shape.
        lo (float):
            The lower integration limit.
        hi (float):
            The upper integration limit, at least `lo`.
        cfg (QuadratureConfig, optional):
            The tolerances. Defaults to `QuadratureConfig()`.

    Returns:
        float:
            The integral.

    Raises:
        ValueError:
            If `hi` is smaller than `lo` or a limit is not finite.
        QuadratureError:
            If the tolerance is not met within `cfg.max_panels` panels.

    Example:
        >>> round(integrate_1d(np.sin, 0.0, np.pi), 10)
        2.0
    """
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError(f"Integration limits must be finite, got [{lo}, {hi}].")
    if hi < lo:
        raise ValueError(f"Integration limits must be ordered, got [{lo}, {hi}].")
    if hi == lo:
        return 0.0

    nodes, weights = _gauss_legendre(cfg.panel_order)

    def refine(a: float, b: float) -> Tuple[float, float]:
        """Two-level estimate and error of a panel"""
        coarse = _panel(f, a, b, nodes, weights)
        mid = 0.5 * (a + b)
        fine = _panel(f, a, mid, nodes, weights) + _panel(f, mid, b, nodes, weights)
        return fine, abs(fine - coarse)

    # Max-heap of panels keyed on their error estimate
    estimate, error = refine(lo, hi)
    heap: List[Tuple[float, float, float, float]] = [(-error, lo, hi, estimate)]
    total, total_error = estimate, error

    while total_error > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        if len(heap) >= cfg.max_panels:
            raise QuadratureError(
                f"Quadrature over [{lo}, {hi}] did not converge within "
                f"{cfg.max_panels} panels.",
                estimate=total,
                error_bound=total_error,
                panels=len(heap),
            )

        neg_error, a, b, panel_estimate = heapq.heappop(heap)
        mid = 0.5 * (a + b)

        # Panels narrower than floating point resolution cannot be refined further
        if not a < mid < b:
            raise QuadratureError(
                f"Quadrature over [{lo}, {hi}] reached the floating point resolution "
                f"near x={mid}.",
                estimate=total,
                error_bound=total_error,
                panels=len(heap) + 1,
            )

        left, left_error = refine(a, mid)
        right, right_error = refine(mid, b)
        heapq.heappush(heap, (-left_error, a, mid, left))
        heapq.heappush(heap, (-right_error, mid, b, right))

        # Re-sum rather than update incrementally, to avoid drift
        total = sum(entry[3] for entry in heap)
        total_error = sum(-entry[0] for entry in heap)

    return total
