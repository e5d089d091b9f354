import numpy as np
import pytest
from scipy import stats

from nccsim import (
    CELLS,
    TimeTrendSpec,
    TrendPattern,
    simulate_trial,
    time_trend,
)
from conftest import default_config

LINEAR = TimeTrendSpec(TrendPattern.LINEAR, 0.15)
STEPWISE = TimeTrendSpec(TrendPattern.STEPWISE, 0.15)


class TestTimeTrend:
    def test_linear_endpoints(self):
        assert time_trend(1, 750, 1, LINEAR) == 0.0
        assert time_trend(750, 750, 2, LINEAR) == pytest.approx(0.15)

    def test_linear_midpoint(self):
        assert time_trend(376, 751, 1, LINEAR) == pytest.approx(0.075)

    def test_stepwise_by_period(self):
        assert time_trend(10, 750, 1, STEPWISE) == 0.0
        assert time_trend(10, 750, 2, STEPWISE) == pytest.approx(0.15)

    def test_none_ignores_lambda(self):
        spec = TimeTrendSpec(TrendPattern.NONE, 0.9)
        assert time_trend(5, 10, 2, spec) == 0.0

    def test_linear_needs_two_patients(self):
        with pytest.raises(ValueError):
            time_trend(1, 1, 1, LINEAR)

    def test_index_bounds(self):
        with pytest.raises(ValueError):
            time_trend(0, 10, 1, LINEAR)
        with pytest.raises(ValueError):
            time_trend(11, 10, 1, LINEAR)


class TestSimulateTrial:
    def test_deterministic_given_seed(self):
        config = default_config(theta1=0.2, trend=LINEAR)
        a = simulate_trial(config, 123)
        b = simulate_trial(config, 123)
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.arm, b.arm)
        for cell in CELLS:
            assert a.mean(*cell) == b.mean(*cell)

    def test_different_seeds_differ(self):
        config = default_config()
        assert not np.array_equal(simulate_trial(config, 1).y, simulate_trial(config, 2).y)

    def test_cell_counts_match_config(self):
        config = default_config(n01=10, n11=20, n02=30, n12=40, n22=50)
        data = simulate_trial(config, 7)
        for (k, s), n in zip(CELLS, (10, 20, 30, 40, 50)):
            assert data.count(k, s) == n
        assert data.patient[0] == 1 and data.patient[-1] == config.total_planned

    def test_recruitment_order_periods(self):
        config = default_config(n01=5, n11=5, n02=5, n12=5, n22=5)
        data = simulate_trial(config, 7)
        assert np.all(np.diff(data.period) >= 0)
        assert (data.period == 1).sum() == 10

    def test_cell_means_are_arithmetic_means(self):
        data = simulate_trial(default_config(), 11)
        for k, s in CELLS:
            values = data.y[(data.arm == k) & (data.period == s)]
            assert data.mean(k, s) == pytest.approx(values.mean(), rel=1e-12)

    def test_degenerate_noise_recovers_effect(self):
        config = default_config(sigma=1e-12, theta2=0.32)
        data = simulate_trial(config, 3)
        assert data.mean(2, 2) - data.mean(0, 2) == pytest.approx(0.32, abs=1e-9)

    def test_arrays_are_read_only(self):
        data = simulate_trial(default_config(), 5)
        with pytest.raises(ValueError):
            data.y[0] = 99.0

    def test_drop_arm1_period2(self):
        data = simulate_trial(default_config(), 5)
        dropped = data.drop_arm1_period2()
        assert dropped.count(1, 2) == 0
        assert dropped.count(1, 1) == 150
        assert dropped.mean(2, 2) == pytest.approx(data.mean(2, 2), rel=1e-15)
        with pytest.raises(ValueError):
            dropped.mean(1, 2)

    def test_stepwise_shift_between_control_periods(self):
        # E[mean(0,2) - mean(0,1)] = lambda under a null design
        config = default_config(n01=40, n11=40, n02=40, n12=40, n22=40, trend=STEPWISE)
        reps = 4000
        diffs = np.empty(reps)
        for i in range(reps):
            data = simulate_trial(config, i)
            diffs[i] = data.mean(0, 2) - data.mean(0, 1)
        se = diffs.std(ddof=1) / np.sqrt(reps)
        assert abs(diffs.mean() - 0.15) < 3 * se

    def test_linear_trend_hits_all_arms_equally(self):
        # with near-zero noise the cell means are pure trend; period-2 arms
        # must receive the same drift in expectation
        config = default_config(
            n01=30, n11=30, n02=30, n12=30, n22=30, sigma=1e-9, trend=LINEAR
        )
        reps = 1500
        means = np.empty((reps, 3))
        for i in range(reps):
            data = simulate_trial(config, i)
            means[i] = [data.mean(0, 2), data.mean(1, 2), data.mean(2, 2)]
        se = means.std(axis=0, ddof=1) / np.sqrt(reps)
        for j in (1, 2):
            tol = 3 * np.hypot(se[0], se[j])
            assert abs(means[:, 0].mean() - means[:, j].mean()) < tol

    def test_standardized_cell_means_pass_normality_gate(self):
        config = default_config(n01=20, n11=20, n02=20, n12=20, n22=20)
        reps = 10_000
        z11 = np.empty(reps)
        z22 = np.empty(reps)
        for i in range(reps):
            data = simulate_trial(config, i)
            z11[i] = data.mean(1, 1) * np.sqrt(20)
            z22[i] = data.mean(2, 2) * np.sqrt(20)
        for z in (z11, z22):
            _, p = stats.kstest(z, "norm")
            assert p > 1e-3
