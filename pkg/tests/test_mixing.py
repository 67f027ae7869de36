import math

import mpmath
import numpy as np
import pytest

from supou.errors import ConfigurationError, UnsupportedOperationError
from supou.mixing import (Degenerate, DensityMixing, Discrete, GammaMixing,
                          MittagLefflerMixing, discrete_power_law,
                          mittag_leffler, mittag_leffler_correlation)

ALL_MEASURES = [
    Degenerate(2.0),
    Discrete((1.0, 2.0, 5.0), (0.5, 0.3, 0.2)),
    GammaMixing(0.6),
    GammaMixing(1.5),
    MittagLefflerMixing(0.7),
]


class TestCorrelation:
    def test_gamma_closed_form_value(self):
        assert GammaMixing(0.6).correlation(1.0) == pytest.approx(2.0 ** -0.6, rel=1e-12)

    @pytest.mark.parametrize("mix", ALL_MEASURES)
    def test_unit_mass_at_zero_lag(self, mix):
        assert mix.correlation(0.0) == pytest.approx(1.0, abs=1e-10)

    def test_point_mass(self):
        assert Degenerate(2.0).correlation(1.5) == pytest.approx(math.exp(-3.0), rel=1e-14)

    def test_two_atoms(self):
        mix = Discrete((1.0, 2.0), (0.5, 0.5))
        expected = 0.5 * math.exp(-1.0) + 0.5 * math.exp(-2.0)
        assert mix.correlation(1.0) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(0.2516074, abs=5e-8)

    def test_negative_lag_rejected(self):
        with pytest.raises(ConfigurationError):
            GammaMixing(0.5).correlation(-1.0)

    @pytest.mark.parametrize("alpha", [0.5, 1.2])
    def test_gamma_quadrature_matches_closed_form(self, alpha):
        mix = GammaMixing(alpha)
        for tau in np.logspace(-2, 3, 12):
            closed = mix.correlation(tau)
            quad = mix.correlation(tau, method="quadrature")
            assert quad == pytest.approx(closed, rel=1e-8)

    def test_mittag_leffler_closed_form(self):
        mix = MittagLefflerMixing(0.7)
        assert mix.correlation(2.0) == pytest.approx(1.0 / (1.0 + 2.0 ** 0.7), rel=1e-12)

    def test_mittag_leffler_quadrature_matches_closed_form(self):
        mix = MittagLefflerMixing(0.7)
        for tau in (0.5, 3.0):
            quad = mix.correlation(tau, method="quadrature")
            assert quad == pytest.approx(mix.correlation(tau), rel=1e-7)

    @pytest.mark.parametrize("mix", ALL_MEASURES)
    def test_nonincreasing_and_convex(self, mix):
        taus = np.linspace(0.0, 10.0, 41)
        r = np.array([mix.correlation(t) for t in taus])
        assert np.all(np.diff(r) <= 1e-12)
        assert np.all(np.diff(r, 2) >= -1e-12)

    def test_tauberian_slope(self):
        # long-range decay: log r ~ -alpha log tau at large lags
        mix = GammaMixing(0.7)
        taus = np.logspace(3, 6, 15)
        r = np.array([mix.correlation(t) for t in taus])
        slope = np.polyfit(np.log(taus), np.log(r), 1)[0]
        assert slope == pytest.approx(-0.7, abs=0.02)


class TestCdfNearZero:
    def test_exponential_case(self):
        assert GammaMixing(1.0).cdf_near_zero(1.0) == pytest.approx(1.0 - math.exp(-1.0),
                                                                    rel=1e-12)

    def test_point_mass_above(self):
        assert Degenerate(1.0).cdf_near_zero(0.5) == 0.0

    def test_incomplete_gamma_series_oracle(self):
        # gamma(0.5, 0.01) / Gamma(0.5) by the alternating series
        with mpmath.workdps(40):
            x, a = mpmath.mpf("0.01"), mpmath.mpf("0.5")
            series = mpmath.nsum(lambda n: (-1) ** n * x ** (a + n)
                                 / (mpmath.factorial(n) * (a + n)), [0, mpmath.inf])
            expected = float(series / mpmath.gamma(a))
        assert GammaMixing(0.5).cdf_near_zero(0.01) == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("mix", [GammaMixing(0.6), GammaMixing(1.5),
                                     MittagLefflerMixing(0.7)])
    def test_regular_variation_constant(self, mix):
        # cdf(x) / x^alpha stabilizes at the tail scale as x -> 0
        alpha = mix.tail_index
        ratios = [mix.cdf_near_zero(10.0 ** -k) / 10.0 ** (-k * alpha)
                  for k in range(2, 7)]
        assert ratios[-1] == pytest.approx(mix.tail_scale, rel=0.05)
        errs = [abs(r - mix.tail_scale) for r in ratios]
        assert errs[-1] <= errs[0]


class TestInverseMomentIntegral:
    def test_point_mass(self):
        assert Degenerate(2.0).inverse_moment_integral(3) == pytest.approx(0.125, rel=1e-14)

    def test_divergent_flag(self):
        assert GammaMixing(0.5).inverse_moment_integral(2) == math.inf

    def test_gamma_closed_form(self):
        assert GammaMixing(3.0).inverse_moment_integral(1) == pytest.approx(0.5, rel=1e-12)

    def test_truncated_lower_limit(self):
        mix = GammaMixing(0.5)
        val = mix.inverse_moment_integral(2, lower=1.0)
        assert 0.0 < val < math.inf


class TestSample:
    def test_point_mass(self):
        rng = np.random.default_rng(0)
        assert Degenerate(3.0).sample(rng) == 3.0

    def test_degenerate_weights(self):
        rng = np.random.default_rng(0)
        mix = Discrete((1.0, 2.0), (1.0, 0.0))
        assert all(v == 1.0 for v in mix.sample(rng, size=20))

    def test_gamma_sampler_mean(self):
        rng = np.random.default_rng(12345)
        draws = GammaMixing(2.0).sample(rng, size=100_000)
        assert draws.mean() == pytest.approx(2.0, abs=0.02)

    def test_reproducible(self):
        a = GammaMixing(2.0).sample(np.random.default_rng(7), size=10)
        b = GammaMixing(2.0).sample(np.random.default_rng(7), size=10)
        assert np.array_equal(a, b)

    def test_mittag_leffler_rejected(self):
        with pytest.raises(UnsupportedOperationError):
            MittagLefflerMixing(0.7).sample(np.random.default_rng(0))


class TestValidation:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ConfigurationError):
            Discrete((1.0, 2.0), (0.5, 0.6))

    def test_positive_rates(self):
        with pytest.raises(ConfigurationError):
            Discrete((0.0, 2.0), (0.5, 0.5))

    def test_degenerate_rate_positive(self):
        with pytest.raises(ConfigurationError):
            Degenerate(-1.0)

    def test_density_mass_checked(self):
        with pytest.raises(ConfigurationError):
            DensityMixing(density=lambda x: math.exp(-x) * 2.0, tail_index=1.0)

    def test_density_accepted(self):
        mix = DensityMixing(density=lambda x: math.exp(-x), tail_index=1.0)
        assert mix.correlation(1.0) == pytest.approx(0.5, rel=1e-8)


class TestDiscretePowerLaw:
    def test_truncation_leaves_unit_mass(self):
        mix = discrete_power_law(1.0, 0.8)
        assert sum(mix.weights) == pytest.approx(1.0, abs=1e-12)
        assert mix.tail_index == 0.8

    def test_rule_truncation_for_light_tails(self):
        # geometric weights reach the negligible-tail threshold quickly
        mix = Discrete.from_rule(lambda k: 1.0 / k, lambda k: 0.5 ** k)
        assert sum(mix.weights) == pytest.approx(1.0, abs=1e-12)
        assert len(mix.rates) < 50

    def test_rates_decrease(self):
        mix = discrete_power_law(2.0, 1.0, n_atoms=50)
        assert mix.rates[0] == 2.0
        assert all(a > b for a, b in zip(mix.rates, mix.rates[1:]))


class TestMittagLefflerFunction:
    def test_reduces_to_exponential(self):
        for z in (-0.5, -5.0, -40.0):
            assert mittag_leffler(1.0, z) == pytest.approx(math.exp(z), rel=1e-10)

    def test_at_zero(self):
        assert mittag_leffler(0.7, 0.0) == 1.0

    def test_series_asymptotic_consistency(self):
        # both branches around the internal switch agree
        a = 0.6
        for x in (25.0 ** a, 35.0 ** a):
            with mpmath.workdps(60):
                ref = float(mpmath.nsum(lambda k: mpmath.mpf(-x) ** k
                                        / mpmath.gamma(a * k + 1), [0, mpmath.inf]))
            assert mittag_leffler(a, -x) == pytest.approx(ref, rel=1e-8)

    def test_reference_correlation_curve(self):
        assert mittag_leffler_correlation(0.6, 0.4, 0.0) == 1.0
        # long-lag decay has exponent gamma
        taus = np.logspace(4, 6, 7)
        r = [mittag_leffler_correlation(0.6, 0.4, t) for t in taus]
        slope = np.polyfit(np.log(taus), np.log(r), 1)[0]
        assert slope == pytest.approx(-0.4, abs=0.02)
