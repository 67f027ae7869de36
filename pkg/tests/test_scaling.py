import numpy as np
import pytest

from supou.engine import AggregateKind, CumulantTable, cumulant_table
from supou.errors import ConfigurationError, DomainError
from supou.marginal import GammaLaw, InverseGaussian
from supou.mixing import Degenerate, GammaMixing
from supou.scaling import (FitRow, ScalingFit, convexity_check, default_t_grid,
                           fit_sigma, fit_tau, intermittency_test, q_star,
                           theoretical_tau)


def synthetic_table(beta, c=2.0, m=2):
    times = list(np.logspace(2, 7, 12))
    values = [c * t ** beta for t in times]
    return CumulantTable(kind=AggregateKind.INTEGRATED, orders=[m], times=times,
                         factors={m: values}, values={m: values})


def make_fit(qs, taus):
    rows = [FitRow(exponent=q, estimate=v, stderr=0.0, r2=1.0,
                   t_min=1e3, t_max=1e6, n_points=10) for q, v in zip(qs, taus)]
    return ScalingFit(kind="tau", rows=rows)


class TestTheoretical:
    def test_q_star(self):
        assert q_star(0.6) == 2
        assert q_star(1.0) == 4
        assert q_star(0.99) == 2
        assert q_star(1.7) == 4

    def test_tau_above_threshold(self):
        assert theoretical_tau(4, 0.6) == pytest.approx(3.4)

    def test_tau_below_threshold_unknown(self):
        assert theoretical_tau(1, 0.6) is None

    def test_invalid_inputs(self):
        with pytest.raises(ConfigurationError):
            q_star(-1.0)
        with pytest.raises(ConfigurationError):
            theoretical_tau(0, 0.5)


class TestFitSigma:
    def test_recovers_exact_power_law(self):
        fit = fit_sigma(synthetic_table(1.37), 2, (1e3, 1e6))
        assert fit.estimate == pytest.approx(1.37, abs=1e-10)
        assert fit.r2 == pytest.approx(1.0, abs=1e-12)
        assert fit.stderr == pytest.approx(0.0, abs=1e-8)

    def test_negative_values_use_magnitude(self):
        table = synthetic_table(2.0, c=-3.0, m=3)
        fit = fit_sigma(table, 3, (1e3, 1e6))
        assert fit.estimate == pytest.approx(2.0, abs=1e-10)

    def test_order_one_uncentered(self):
        table = cumulant_table(GammaMixing(0.5), InverseGaussian(1.0, 1.0),
                               AggregateKind.INTEGRATED, [1],
                               list(np.logspace(3, 6, 9)))
        fit = fit_sigma(table, 1, (1e3, 1e6))
        assert fit.estimate == pytest.approx(1.0, abs=1e-6)

    def test_long_range_slope(self):
        table = cumulant_table(GammaMixing(0.5), InverseGaussian(1.0, 1.0, centered=True),
                               AggregateKind.INTEGRATED, [3],
                               list(np.logspace(3, 6, 9)))
        fit = fit_sigma(table, 3, (1e3, 1e6))
        assert fit.estimate == pytest.approx(2.5, abs=0.05)

    def test_zero_cumulant_named(self):
        table = synthetic_table(1.0)
        table.values[2][3] = 0.0
        with pytest.raises(DomainError, match=str(table.times[3])):
            fit_sigma(table, 2, (1e3, 1e6))

    def test_missing_order(self):
        with pytest.raises(ConfigurationError):
            fit_sigma(synthetic_table(1.0), 5, (1e3, 1e6))


class TestFitTau:
    def test_recovers_synthetic_self_similar(self):
        times = list(np.logspace(3, 6, 9))
        h, q = 0.5, 4.0
        moments = [t ** (h * q) for t in times]
        fit = fit_tau(times, moments, q, (1e3, 1e6))
        assert fit.estimate == pytest.approx(h * q, abs=1e-10)

    def test_nonpositive_moment_rejected(self):
        times = list(np.logspace(3, 6, 9))
        moments = [t for t in times]
        moments[2] = -1.0
        with pytest.raises(DomainError):
            fit_tau(times, moments, 2.0, (1e3, 1e6))

    def test_window_needs_points(self):
        with pytest.raises(ConfigurationError):
            fit_tau([1.0, 10.0], [1.0, 10.0], 2.0, (1e3, 1e6))

    def test_window_needs_two_decades(self):
        times = list(np.linspace(1000.0, 2000.0, 10))
        with pytest.raises(ConfigurationError):
            fit_tau(times, times, 2.0, (1e3, 2e3))

    def test_invalid_window(self):
        with pytest.raises(ConfigurationError):
            fit_tau([1.0], [1.0], 2.0, (10.0, 1.0))


class TestIntermittency:
    def test_linear_scaling_not_intermittent(self):
        h = 0.5
        assert intermittency_test(make_fit([2, 4], [2 * h, 4 * h])) == "not-intermittent"

    def test_long_range_case_intermittent(self):
        # tau(2)/2 = 0.7 < tau(4)/4 = 0.85
        assert intermittency_test(make_fit([2, 4], [1.4, 3.4]), tol=0.1) == "intermittent"

    def test_single_exponent_inconclusive(self):
        assert intermittency_test(make_fit([2], [1.0])) == "inconclusive"

    def test_decreasing_ratios_inconclusive(self):
        assert intermittency_test(make_fit([2, 4], [2.0, 3.0])) == "inconclusive"


class TestConvexity:
    def test_linear_is_convex(self):
        alpha = 0.6
        fit = make_fit([2, 4, 6], [2 - alpha, 4 - alpha, 6 - alpha])
        assert convexity_check(fit) is True

    def test_ratio_violation(self):
        # increments convex but tau(q)/q decreases: 0.7, 0.5, 0.567
        assert convexity_check(make_fit([2, 4, 6], [1.4, 2.0, 3.4]), tol=0.05) is False

    def test_concave_rejected(self):
        assert convexity_check(make_fit([2, 4, 6], [2.0, 3.9, 4.5]), tol=0.05) is False

    def test_needs_three_points(self):
        with pytest.raises(ConfigurationError):
            convexity_check(make_fit([2, 4], [1.0, 2.0]))


class TestDefaults:
    def test_grid_shape(self):
        grid = default_t_grid()
        assert len(grid) == 25
        assert grid[0] == pytest.approx(1e3)
        assert grid[-1] == pytest.approx(1e6)

    def test_invalid_grid(self):
        with pytest.raises(ConfigurationError):
            default_t_grid(count=2)
