"""Unit tests for the `specialfn` module."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jamtol.specialfn import (
    QuadratureConfig,
    QuadratureError,
    integrate_1d,
    log_beta,
    log_gamma,
    normal_cdf,
    normal_pdf,
    phi_fn,
    reg_inc_beta,
)


def phi_oracle(n: int, x: float) -> float:
    """The integral of (1 - t²)^(n-1) over [0, e^(-x)] in extended precision"""
    with mpmath.workdps(40):
        upper = mpmath.exp(-mpmath.mpf(x))
        # Break points where the integrand of large n falls off
        breaks = [k / math.sqrt(n) for k in (0.5, 1, 2, 4, 8)]
        points = [mpmath.mpf(0)] + [b for b in breaks if b < upper] + [upper]
        value = mpmath.quad(lambda t: (1 - t * t) ** (n - 1), points)
        return float(value)


class TestNormal:
    @pytest.mark.parametrize(
        argnames="x, expected",
        argvalues=[(0.0, 0.5), (1.96, 0.9750021048517795), (-1.0, 0.15865525393145707)],
        ids=["zero", "upper_quantile", "minus_one"],
    )
    def test_normal_cdf(self, x, expected):
        assert float(normal_cdf(x)) == pytest.approx(expected, rel=1e-12)

    def test_normal_cdf_symmetric(self):
        xs = np.linspace(-8.0, 8.0, 161)
        np.testing.assert_allclose(normal_cdf(xs) + normal_cdf(-xs), 1.0, atol=1e-14)

    def test_normal_cdf_far_tail(self):
        assert float(normal_cdf(40.0)) == 1.0
        assert float(normal_cdf(-40.0)) < 1e-300

    def test_normal_pdf_integrates_to_one(self):
        cfg = QuadratureConfig(rel_tol=1e-12, abs_tol=1e-14)
        assert integrate_1d(normal_pdf, -10.0, 10.0, cfg) == pytest.approx(
            1.0, abs=1e-10
        )

    def test_normal_pdf_is_vectorised(self):
        values = normal_pdf(np.array([-1.0, 0.0, 1.0]))
        assert values.shape == (3,)
        assert values[0] == values[2]
        assert values[1] == pytest.approx(1 / math.sqrt(2 * math.pi))


class TestBeta:
    def test_log_gamma(self):
        assert log_gamma(5.0) == pytest.approx(math.log(24.0))

    def test_log_gamma_half(self):
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)

    def test_log_gamma_large_half_integer(self):
        # Γ(x + 1) = x Γ(x) applied 171 times from Γ(1/2)
        expected = 0.5 * math.log(math.pi) + math.fsum(
            math.log(k + 0.5) for k in range(171)
        )
        assert log_gamma(171.5) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize(
        argnames="x", argvalues=[0.0, -1.5], ids=["zero", "negative"]
    )
    def test_log_gamma_domain(self, x):
        with pytest.raises(ValueError):
            log_gamma(x)

    def test_log_beta(self):
        assert log_beta(2.0, 3.0) == pytest.approx(math.log(1 / 12))

    def test_reg_inc_beta_symmetric_point(self):
        assert float(reg_inc_beta(2.0, 2.0, 0.5)) == pytest.approx(0.5)

    @pytest.mark.parametrize(
        argnames="a, b",
        argvalues=[(0.5, 50.0), (2.0, 3.0), (7.5, 0.25)],
        ids=["half_fifty", "two_three", "skewed"],
    )
    def test_reg_inc_beta_reflection(self, a, b):
        # Dyadic arguments so that 1 - x is exact
        xs = np.arange(1, 64) / 64
        total = reg_inc_beta(a, b, xs) + reg_inc_beta(b, a, 1.0 - xs)
        np.testing.assert_allclose(total, 1.0, atol=1e-12)

    def test_reg_inc_beta_endpoints(self):
        assert float(reg_inc_beta(0.5, 50.0, 0.0)) == 0.0
        assert float(reg_inc_beta(0.5, 50.0, 1.0)) == 1.0

    def test_reg_inc_beta_extended_precision(self):
        with mpmath.workdps(40):
            expected = mpmath.betainc(0.5, 50, 0, 0.25, regularized=True)
        assert float(reg_inc_beta(0.5, 50.0, 0.25)) == pytest.approx(
            float(expected), rel=1e-12
        )

    @pytest.mark.parametrize(
        argnames="a, b, x",
        argvalues=[
            (0.0, 1.0, 0.5),
            (1.0, -1.0, 0.5),
            (1.0, 1.0, 1.5),
            (1.0, 1.0, -0.1),
        ],
        ids=["zero_a", "negative_b", "x_above_one", "x_below_zero"],
    )
    def test_reg_inc_beta_domain(self, a, b, x):
        with pytest.raises(ValueError):
            reg_inc_beta(a, b, x)


class TestPhi:
    @pytest.mark.parametrize(
        argnames="n", argvalues=[1, 2, 5, 50, 500, 3000], ids=lambda n: f"n={n}"
    )
    @pytest.mark.parametrize(
        argnames="x", argvalues=[0.0, 0.1, 1.0, 3.0], ids=lambda x: f"x={x}"
    )
    def test_matches_extended_precision_quadrature(self, n, x):
        assert phi_fn(n, x) == pytest.approx(phi_oracle(n, x), rel=1e-10)

    @pytest.mark.parametrize(
        argnames="n", argvalues=[1, 2, 3, 7, 20], ids=lambda n: f"n={n}"
    )
    @pytest.mark.parametrize(
        argnames="x", argvalues=[0.0, 0.5, 2.0, 6.0], ids=lambda x: f"x={x}"
    )
    def test_matches_binomial_sum(self, n, x):
        # (1 - t²)^(n-1) expanded and integrated term by term
        with mpmath.workdps(40):
            u = mpmath.exp(-mpmath.mpf(x))
            expected = mpmath.fsum(
                mpmath.binomial(n - 1, k) * (-1) ** k * u ** (2 * k + 1) / (2 * k + 1)
                for k in range(n)
            )
        assert phi_fn(n, x) == pytest.approx(float(expected), rel=1e-11)

    def test_decreasing_in_x(self):
        values = phi_fn(5, np.linspace(0.0, 10.0, 201))
        assert (np.diff(values) < 0).all()

    def test_decreasing_in_n(self):
        values = [phi_fn(n, 0.3) for n in range(1, 301)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_single_relay_is_exponential(self):
        xs = np.linspace(0.0, 5.0, 11)
        np.testing.assert_allclose(phi_fn(1, xs), np.exp(-xs), rtol=1e-13)

    def test_scalar_input_gives_float(self):
        assert isinstance(phi_fn(3, 0.5), float)

    def test_array_input_gives_array(self):
        assert phi_fn(3, np.array([0.5, 1.0])).shape == (2,)

    @pytest.mark.parametrize(
        argnames="n, x",
        argvalues=[(0, 0.5), (3, -0.1)],
        ids=["no_relays", "negative_x"],
    )
    def test_domain(self, n, x):
        with pytest.raises(ValueError):
            phi_fn(n, x)

    @given(
        n=st.integers(min_value=1, max_value=5000),
        x=st.floats(min_value=0.0, max_value=50.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_bounded_by_upper_limit(self, n, x):
        value = phi_fn(n, x)
        assert 0.0 <= value <= math.exp(-x) * (1 + 1e-12)


class TestQuadratureConfig:
    @pytest.mark.parametrize(
        argnames="kwargs",
        argvalues=[
            dict(rel_tol=0.0),
            dict(abs_tol=-1e-12),
            dict(max_panels=0),
            dict(panel_order=0),
        ],
        ids=["zero_rel_tol", "negative_abs_tol", "no_panels", "no_nodes"],
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises(ValueError):
            QuadratureConfig(**kwargs)

    def test_tighter(self):
        cfg = QuadratureConfig().tighter()
        assert cfg.rel_tol == pytest.approx(1e-9)
        assert cfg.abs_tol == pytest.approx(1e-13)
        assert cfg.max_panels == QuadratureConfig().max_panels


class TestIntegrate:
    def test_sine(self):
        assert integrate_1d(np.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-9)

    def test_polynomial_is_exact(self):
        result = integrate_1d(lambda x: 3 * x**2 - 2 * x + 1, -1.0, 2.0)
        assert result == pytest.approx(9.0, rel=1e-12)

    def test_peaked_integrand_with_endpoint_singularity(self):
        def f(x):
            return np.exp(-400.0 * (x - 0.3) ** 2) + np.sqrt(x)

        bump = math.sqrt(math.pi / 400.0) / 2 * (math.erf(14.0) + math.erf(6.0))
        assert integrate_1d(f, 0.0, 1.0) == pytest.approx(bump + 2 / 3, rel=1e-7)

    def test_empty_interval(self):
        assert integrate_1d(np.exp, 1.5, 1.5) == 0.0

    @pytest.mark.parametrize(
        argnames="lo, hi",
        argvalues=[(1.0, 0.0), (0.0, math.inf), (math.nan, 1.0)],
        ids=["reversed", "infinite", "nan"],
    )
    def test_invalid_limits(self, lo, hi):
        with pytest.raises(ValueError):
            integrate_1d(np.exp, lo, hi)

    def test_non_convergence_carries_diagnostics(self):
        cfg = QuadratureConfig(max_panels=4)
        with pytest.raises(QuadratureError) as excinfo:
            integrate_1d(lambda x: np.sign(x - 1 / 3), 0.0, 1.0, cfg)
        error = excinfo.value
        assert error.panels == 4
        assert error.error_bound > 0
        assert error.estimate == pytest.approx(1 / 3, abs=0.1)
        assert set(error.to_dict()) == {"error", "estimate", "error_bound", "panels"}
