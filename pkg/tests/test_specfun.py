import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poissonsir.errors import (
    DivergentMomentError,
    DomainError,
    EmptyConditioningError,
)
from poissonsir.specfun import (
    Constant,
    ExponentialUnitMean,
    GammaUnitMean,
    UniformInterval,
    central_derivatives,
    fractional_moment,
    gamma_fn,
    integrate,
    integrate_semi_infinite,
    log_gamma_fn,
    truncated_moment_lower,
    truncated_moment_upper,
)

from conftest import rng

mpmath.mp.dps = 30


class TestGammaFn:
    def test_integer_factorials(self):
        assert gamma_fn(3.0) == pytest.approx(2.0, rel=1e-12)
        assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-12)
        assert gamma_fn(6.0) == pytest.approx(120.0, rel=1e-12)

    def test_half_integers(self):
        assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
        # sqrt(pi)/2, cross-checked against a high-precision evaluation
        assert gamma_fn(1.5) == pytest.approx(0.8862269254527580, rel=1e-10)

    def test_against_high_precision_on_working_range(self):
        xs = np.concatenate(
            [np.linspace(0.01, 0.49, 25), np.linspace(0.5, 50.0, 200)]
        )
        for x in xs:
            expected = float(mpmath.gamma(float(x)))
            assert gamma_fn(float(x)) == pytest.approx(expected, rel=1e-10)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            gamma_fn(0.0)
        with pytest.raises(DomainError):
            gamma_fn(-2.5)

    @given(st.floats(min_value=0.1, max_value=40.0))
    @settings(max_examples=200, deadline=None)
    def test_recurrence(self, x):
        assert gamma_fn(x + 1.0) == pytest.approx(x * gamma_fn(x), rel=1e-9)

    def test_log_form_handles_large_arguments(self):
        for x in (200.0, 1e4, 1e6):
            assert log_gamma_fn(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-12)


class TestQuadrature:
    def test_finite(self):
        assert integrate(lambda t: t * t, 0.0, 3.0) == pytest.approx(9.0, rel=1e-10)

    def test_semi_infinite(self):
        assert integrate_semi_infinite(lambda t: math.exp(-t), 0.0) == pytest.approx(
            1.0, rel=1e-9
        )
        assert integrate_semi_infinite(lambda t: math.exp(-t), 2.0) == pytest.approx(
            math.exp(-2.0), rel=1e-9
        )


class TestFractionalMoment:
    def test_unit_constant(self):
        assert fractional_moment(Constant(1.0), 0.37) == 1.0

    def test_constant_power(self):
        assert fractional_moment(Constant(15.0), -4.0) == pytest.approx(15.0**-4, rel=1e-14)

    def test_zero_exponent_is_exact(self):
        for dist in (Constant(3.0), UniformInterval(15.0, 25.0), GammaUnitMean(0.7)):
            assert fractional_moment(dist, 0.0) == 1.0

    def test_unit_means(self):
        for dist in (Constant(1.0), GammaUnitMean(0.5), GammaUnitMean(1.0), GammaUnitMean(8.0)):
            assert fractional_moment(dist, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_gamma_closed_form(self):
        m, a = 2.0, 0.5
        expected = gamma_fn(m + a) / (gamma_fn(m) * m**a)
        assert fractional_moment(GammaUnitMean(m), a) == pytest.approx(expected, rel=1e-12)

    def test_uniform_closed_form_matches_quadrature(self):
        dist = UniformInterval(15.0, 25.0)
        for a in (-4.0, -1.0, 0.5, 2.0, 4.0):
            oracle = integrate(lambda z, a=a: z**a / 10.0, 15.0, 25.0)
            assert fractional_moment(dist, a) == pytest.approx(oracle, rel=1e-9)

    def test_uniform_fourth_moment(self):
        # (25^5 - 15^5) / (5 * 10)
        assert fractional_moment(UniformInterval(15.0, 25.0), 4.0) == pytest.approx(
            180125.0, rel=1e-12
        )

    def test_exponential_half_moment_against_monte_carlo(self):
        # independent sampling oracle for E[Z^0.5], Z ~ Exp(1)
        draws = rng(100).standard_exponential(10_000_000)
        oracle = float(np.mean(np.sqrt(draws)))
        value = fractional_moment(GammaUnitMean(1.0), 0.5)
        assert value == pytest.approx(0.8862269, rel=1e-6)
        assert value == pytest.approx(oracle, rel=1e-3)

    def test_divergent_moment_names_exponent(self):
        with pytest.raises(DivergentMomentError, match="-2.5"):
            fractional_moment(GammaUnitMean(2.5), -2.5)

    @given(
        a=st.floats(min_value=0.05, max_value=0.95),
        shape=st.floats(min_value=0.3, max_value=20.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_jensen_for_gamma(self, a, shape):
        dist = GammaUnitMean(shape)
        assert fractional_moment(dist, a) <= fractional_moment(dist, 1.0) ** a + 1e-12

    @given(a=st.floats(min_value=0.05, max_value=0.95))
    @settings(max_examples=50, deadline=None)
    def test_jensen_for_uniform(self, a):
        dist = UniformInterval(15.0, 25.0)
        assert fractional_moment(dist, a) <= fractional_moment(dist, 1.0) ** a + 1e-12


class TestTruncatedMoments:
    def test_memoryless_exponential(self):
        assert truncated_moment_upper(ExponentialUnitMean(), 1.0, 1.0) == pytest.approx(
            2.0, rel=1e-9
        )

    def test_vacuous_truncation_reduces_to_plain_moment(self):
        for dist, a in ((GammaUnitMean(2.0), 0.7), (UniformInterval(15.0, 25.0), -4.0)):
            assert truncated_moment_upper(dist, a, 0.0) == pytest.approx(
                fractional_moment(dist, a), rel=1e-12
            )

    def test_full_support_lower_reduces_to_plain_moment(self):
        dist = UniformInterval(15.0, 25.0)
        assert truncated_moment_lower(dist, 0.5, 25.0) == pytest.approx(
            fractional_moment(dist, 0.5), rel=1e-12
        )

    def test_uniform_conditional_mean(self):
        assert truncated_moment_lower(UniformInterval(15.0, 25.0), 1.0, 20.0) == pytest.approx(
            17.5, rel=1e-12
        )

    def test_gamma_upper_against_high_precision_quadrature(self):
        # E[Z^0.5 | Z >= 0.8] for the unit-mean gamma with shape 2
        assert truncated_moment_upper(GammaUnitMean(2.0), 0.5, 0.8) == pytest.approx(
            1.19829531394, rel=1e-8
        )

    def test_exponential_lower_against_high_precision_quadrature(self):
        # E[Z^0.5 | Z <= 1] for the unit-mean exponential
        assert truncated_moment_lower(GammaUnitMean(1.0), 0.5, 1.0) == pytest.approx(
            0.599481675368, rel=1e-8
        )

    def test_constant_marks(self):
        assert truncated_moment_upper(Constant(15.0), 2.0, 10.0) == pytest.approx(225.0)
        assert truncated_moment_lower(Constant(15.0), 2.0, 20.0) == pytest.approx(225.0)

    def test_empty_conditioning(self):
        with pytest.raises(EmptyConditioningError):
            truncated_moment_upper(Constant(1.0), 1.0, 2.0)
        with pytest.raises(EmptyConditioningError):
            truncated_moment_lower(Constant(1.0), 1.0, 0.5)
        with pytest.raises(EmptyConditioningError):
            truncated_moment_lower(UniformInterval(15.0, 25.0), 1.0, 10.0)
        with pytest.raises(EmptyConditioningError):
            truncated_moment_upper(UniformInterval(15.0, 25.0), 1.0, 30.0)

    def test_negative_exponents(self):
        # direct conditional-density quadrature path
        value = truncated_moment_upper(GammaUnitMean(2.0), -0.5, 0.5)
        dist = GammaUnitMean(2.0)
        oracle = integrate_semi_infinite(
            lambda z: z**-0.5 * float(dist.pdf(z)), 0.5
        ) / float(dist.ccdf(0.5))
        assert value == pytest.approx(oracle, rel=1e-10)

    def test_lower_divergence(self):
        with pytest.raises(DivergentMomentError):
            truncated_moment_lower(GammaUnitMean(0.5), -0.5, 1.0)

    @pytest.mark.parametrize(
        "dist,a,b",
        [
            (GammaUnitMean(1.0), 0.5, 0.7),
            (GammaUnitMean(1.0), 2.0, 1.5),
            (GammaUnitMean(2.0), 0.5, 0.8),
            (GammaUnitMean(2.0), -0.3, 1.2),
            (GammaUnitMean(0.5), 1.0, 0.4),
            (GammaUnitMean(8.0), 1.5, 1.1),
            (UniformInterval(15.0, 25.0), 1.0, 20.0),
            (UniformInterval(15.0, 25.0), -4.0, 17.0),
            (UniformInterval(15.0, 25.0), 2.0, 23.0),
            (UniformInterval(1.0, 2.0), 0.5, 1.5),
        ],
    )
    def test_law_of_total_expectation(self, dist, a, b):
        keep_hi = float(dist.ccdf(b))
        keep_lo = float(dist.cdf(b))
        total = keep_hi * truncated_moment_upper(dist, a, b) + keep_lo * truncated_moment_lower(
            dist, a, b
        )
        assert total == pytest.approx(fractional_moment(dist, a), rel=1e-8)


class TestCentralDerivatives:
    def test_quadratic_is_exact(self):
        first, second = central_derivatives(lambda x: x * x, 3.0, 1e-3)
        assert first == pytest.approx(6.0, abs=1e-6)
        assert second == pytest.approx(2.0, abs=1e-6)

    def test_constant(self):
        first, second = central_derivatives(lambda x: 4.2, 1.0, 1e-4)
        assert first == 0.0
        assert second == 0.0

    def test_inverse_square(self):
        first, second = central_derivatives(lambda lam: lam**-2, 1.0, 1e-4)
        assert first == pytest.approx(-2.0, abs=1e-5)
        assert second == pytest.approx(6.0, abs=1e-5)

    def test_nonfinite_propagates(self):
        with pytest.raises(DomainError):
            central_derivatives(lambda x: math.inf, 1.0, 1e-3)

    def test_step_validation(self):
        with pytest.raises(DomainError):
            central_derivatives(lambda x: x, 1.0, 2.0)
        with pytest.raises(DomainError):
            central_derivatives(lambda x: x, 1.0, 0.0)


class TestDistributionValidation:
    def test_constant_positive(self):
        with pytest.raises(DomainError):
            Constant(0.0)

    def test_uniform_bounds(self):
        with pytest.raises(DomainError):
            UniformInterval(0.5, 2.0)
        with pytest.raises(DomainError):
            UniformInterval(5.0, 5.0)

    def test_gamma_shape(self):
        with pytest.raises(DomainError):
            GammaUnitMean(0.0)

    def test_exponential_alias(self):
        dist = ExponentialUnitMean()
        assert isinstance(dist, GammaUnitMean)
        assert dist.shape == 1.0
