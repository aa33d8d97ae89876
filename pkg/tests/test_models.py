import math

import numpy as np
import pytest
from scipy import stats

from poissonsir.errors import ConfigError, DomainError, EmptyConditioningError
from poissonsir.models import (
    AlwaysOn,
    ChannelAware,
    ConditionedAtLeast,
    ConditionedAtMost,
    ConstantPower,
    NetworkModel,
    Opportunistic,
    effective_network,
    model_from_keys,
    model_to_keys,
    sample_mark,
    tx_power,
)
from poissonsir.specfun import (
    Constant,
    GammaUnitMean,
    UniformInterval,
    fractional_moment,
    truncated_moment_lower,
    truncated_moment_upper,
)

from conftest import rng


class TestSampleMark:
    def test_constant_is_deterministic(self):
        gen = rng(1)
        assert sample_mark(Constant(15.0), gen) == 15.0
        assert np.all(sample_mark(Constant(15.0), gen, 100) == 15.0)

    def test_uniform_mean(self):
        draws = sample_mark(UniformInterval(15.0, 25.0), rng(2), 1_000_000)
        assert abs(draws.mean() - 20.0) < 0.01

    def test_gamma_variance_tracks_shape(self):
        # unit mean, variance 1/shape
        draws = sample_mark(GammaUnitMean(4.0), rng(3), 1_000_000)
        assert abs(draws.var(ddof=1) - 0.25) < 0.002

    @pytest.mark.parametrize(
        "dist",
        [GammaUnitMean(1.0), GammaUnitMean(2.0), GammaUnitMean(0.5), UniformInterval(15.0, 25.0)],
    )
    def test_sampling_matches_cdf(self, dist):
        draws = np.asarray(sample_mark(dist, rng(4), 200_000))
        result = stats.kstest(draws, lambda x: np.asarray(dist.cdf(x)))
        assert result.pvalue > 1e-3


class TestTxPower:
    def test_constant(self):
        assert tx_power(ConstantPower(2.5), 0.3, 99.0) == 2.5

    def test_degenerate_channel_aware_is_unit(self):
        law = ChannelAware(rho=0.0, upsilon=0.0)
        assert tx_power(law, 0.17, 23.0) == pytest.approx(1.0)

    def test_normalized_law_value(self):
        model = NetworkModel(
            intensity=1e-4,
            alpha=4.0,
            fading_h=GammaUnitMean(1.0),
            distance=UniformInterval(15.0, 25.0),
            power=ChannelAware(rho=1.0, upsilon=4.0),
        )
        # E[H] * E[D^4] = 180125, so P(1, 20) = 20^4 / 180125
        assert model.power.mean_raw_power == pytest.approx(180125.0, rel=1e-12)
        assert tx_power(model.power, 1.0, 20.0) == pytest.approx(0.88827203331, rel=1e-10)

    def test_empirical_unit_mean(self):
        model = NetworkModel(
            intensity=1e-4,
            alpha=4.0,
            fading_h=GammaUnitMean(1.0),
            distance=UniformInterval(15.0, 25.0),
            power=ChannelAware(rho=1.0, upsilon=4.0),
        )
        gen = rng(5)
        h = sample_mark(model.fading_h, gen, 1_000_000)
        d = sample_mark(model.distance, gen, 1_000_000)
        p = tx_power(model.power, h, d)
        assert abs(p.mean() - 1.0) < 3.0 * p.std(ddof=1) / math.sqrt(p.size)


class TestNetworkModelValidation:
    def test_alpha_must_exceed_two(self):
        with pytest.raises(DomainError, match="alpha"):
            NetworkModel(1e-3, 2.0, GammaUnitMean(1.0), Constant(15.0))

    def test_intensity_positive(self):
        with pytest.raises(DomainError):
            NetworkModel(0.0, 4.0, GammaUnitMean(1.0), Constant(15.0))

    def test_fading_must_have_unit_mean(self):
        with pytest.raises(DomainError, match="unit mean"):
            NetworkModel(1e-3, 4.0, Constant(2.0), Constant(15.0))

    def test_interferer_gain_defaults_to_own_gain_law(self):
        model = NetworkModel(1e-3, 4.0, GammaUnitMean(2.0), Constant(15.0))
        assert model.fading_g is model.fading_h

    def test_distance_support_constraint(self):
        with pytest.raises(DomainError, match="distance"):
            NetworkModel(1e-3, 4.0, GammaUnitMean(1.0), Constant(0.5))

    def test_degenerate_scheduling_rejected(self):
        with pytest.raises(DomainError):
            NetworkModel(
                1e-3,
                4.0,
                GammaUnitMean(1.0),
                UniformInterval(15.0, 25.0),
                scheduling=Opportunistic(min_gain=1.0, max_distance=1.5),
            )


class TestConditionedLaws:
    def test_moment_routes_to_truncated_upper(self):
        base = GammaUnitMean(1.0)
        law = ConditionedAtLeast(base, math.log(2.0))
        assert law.moment(1.3) == pytest.approx(
            truncated_moment_upper(base, 1.3, math.log(2.0)), rel=1e-12
        )

    def test_moment_routes_to_truncated_lower(self):
        base = UniformInterval(15.0, 25.0)
        law = ConditionedAtMost(base, 20.0)
        assert law.moment(1.0) == pytest.approx(
            truncated_moment_lower(base, 1.0, 20.0), rel=1e-12
        )

    def test_samples_respect_bounds(self):
        law = ConditionedAtLeast(GammaUnitMean(1.0), 0.7)
        draws = law.sample(rng(6), 50_000)
        assert np.all(draws >= 0.7)
        result = stats.kstest(draws, lambda x: np.asarray(law.cdf(x)))
        assert result.pvalue > 1e-3

    def test_at_most_samples(self):
        law = ConditionedAtMost(UniformInterval(15.0, 25.0), 20.0)
        draws = law.sample(rng(7), 50_000)
        assert np.all(draws <= 20.0)
        assert abs(draws.mean() - 17.5) < 0.05

    def test_empty_conditioning_rejected(self):
        with pytest.raises(EmptyConditioningError):
            ConditionedAtMost(UniformInterval(15.0, 25.0), 5.0)


class TestEffectiveNetwork:
    def test_always_on_is_identity(self):
        model = NetworkModel(1e-3, 4.0, GammaUnitMean(1.0), Constant(15.0))
        assert effective_network(model) is model

    def test_exponential_uniform_thinning(self):
        model = NetworkModel(
            1e-3,
            4.0,
            GammaUnitMean(1.0),
            UniformInterval(15.0, 25.0),
            scheduling=Opportunistic(min_gain=math.log(2.0), max_distance=20.0),
        )
        eff = effective_network(model)
        assert eff.intensity == pytest.approx(model.intensity / 4.0, rel=1e-12)
        assert isinstance(eff.scheduling, AlwaysOn)
        assert isinstance(eff.fading_h, ConditionedAtLeast)
        assert isinstance(eff.distance, ConditionedAtMost)
        # interferer gain toward the reference receiver stays unconditioned
        assert eff.fading_g is model.fading_g

    def test_vacuous_thresholds_keep_intensity(self):
        model = NetworkModel(
            1e-3,
            4.0,
            GammaUnitMean(1.0),
            UniformInterval(15.0, 25.0),
            scheduling=Opportunistic(min_gain=0.0, max_distance=25.0),
        )
        eff = effective_network(model)
        assert eff.intensity == pytest.approx(model.intensity, rel=1e-12)
        assert eff.fading_h is model.fading_h
        assert eff.distance is model.distance

    def test_idempotent(self):
        model = NetworkModel(
            1e-3,
            4.0,
            GammaUnitMean(1.0),
            UniformInterval(15.0, 25.0),
            scheduling=Opportunistic(min_gain=0.5, max_distance=22.0),
        )
        eff = effective_network(model)
        assert effective_network(eff) is eff

    def test_thinned_intensity_bounds(self):
        model = NetworkModel(
            1e-3,
            4.0,
            GammaUnitMean(1.0),
            UniformInterval(15.0, 25.0),
            scheduling=Opportunistic(min_gain=0.3, max_distance=24.0),
        )
        eff = effective_network(model)
        assert 0.0 < eff.intensity < model.intensity

    def test_scheduling_acceptance_rate(self):
        model = NetworkModel(
            1e-3,
            4.0,
            GammaUnitMean(1.0),
            UniformInterval(15.0, 25.0),
            scheduling=Opportunistic(min_gain=math.log(2.0), max_distance=20.0),
        )
        gen = rng(8)
        n = 1_000_000
        h = sample_mark(model.fading_h, gen, n)
        d = sample_mark(model.distance, gen, n)
        accepted = (h >= model.scheduling.min_gain) & (d <= model.scheduling.max_distance)
        rate = accepted.mean()
        expected = 0.25
        assert abs(rate - expected) < 3.0 * math.sqrt(expected * (1 - expected) / n)


class TestModelTextFormat:
    def test_parse_minimal(self):
        model = model_from_keys(
            {
                "lambda": "1e-3",
                "alpha": "4",
                "fading": "rayleigh",
                "distance": "fixed:15",
                "power": "const:1",
            }
        )
        assert model.intensity == 1e-3
        assert isinstance(model.fading_h, GammaUnitMean) and model.fading_h.shape == 1.0
        assert isinstance(model.distance, Constant) and model.distance.value == 15.0

    def test_parse_full(self):
        model = model_from_keys(
            {
                "lambda": "5e-4",
                "alpha": "3.5",
                "fading": "nakagami:m=2",
                "fading_g": "none",
                "distance": "uniform:15,25",
                "power": "aware:rho=1,upsilon=4",
                "sched": "opp:h0=0.5,d0=20",
            }
        )
        assert isinstance(model.power, ChannelAware)
        assert isinstance(model.scheduling, Opportunistic)
        assert isinstance(model.fading_g, Constant)

    def test_aware_power_normalization_from_text(self):
        model = model_from_keys(
            {
                "lambda": "1e-4",
                "alpha": "4",
                "fading": "rayleigh",
                "distance": "uniform:15,25",
                "power": "aware:rho=1,upsilon=4",
            }
        )
        # normalization E[H]E[D^4]; the law then has unit mean power
        assert model.power.mean_raw_power == pytest.approx(180125.0, rel=1e-12)
        recomputed = fractional_moment(model.fading_h, 1.0) * fractional_moment(
            model.distance, 4.0
        )
        assert recomputed / model.power.mean_raw_power == pytest.approx(1.0, abs=1e-9)

    def test_alpha_constraint_message(self):
        with pytest.raises(DomainError, match="alpha must exceed 2"):
            model_from_keys(
                {"lambda": "1e-3", "alpha": "2", "fading": "rayleigh", "distance": "fixed:15"}
            )

    def test_unknown_keys_listed(self):
        with pytest.raises(ConfigError, match="bogus"):
            model_from_keys(
                {
                    "lambda": "1e-3",
                    "alpha": "4",
                    "fading": "rayleigh",
                    "distance": "fixed:15",
                    "bogus": "1",
                }
            )

    def test_malformed_values(self):
        with pytest.raises(ConfigError):
            model_from_keys(
                {"lambda": "abc", "alpha": "4", "fading": "rayleigh", "distance": "fixed:15"}
            )
        with pytest.raises(ConfigError):
            model_from_keys(
                {"lambda": "1e-3", "alpha": "4", "fading": "weibull", "distance": "fixed:15"}
            )

    def test_round_trip(self):
        keys = {
            "lambda": "0.0005",
            "alpha": "4.0",
            "fading": "nakagami:m=2.0",
            "distance": "uniform:15,25",
            "power": "aware:rho=1,upsilon=4",
            "sched": "opp:h0=0.5,d0=20.0",
        }
        model = model_from_keys(keys)
        again = model_from_keys(model_to_keys(model))
        assert again == model
