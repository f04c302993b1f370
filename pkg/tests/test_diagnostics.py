import numpy as np
import pytest

from trisim import diagnostics
from trisim.diagnostics import StatisticError


class TestMomentStats:
    def test_symmetric_data_zero_skew(self):
        skew, _ = diagnostics.moment_stats(np.array([-1.0, 0.0, 1.0]))
        assert skew == pytest.approx(0.0, abs=1e-15)

    def test_two_point_kurtosis(self):
        # m4 = m2^2 for a symmetric two-point distribution, so excess kurt = -2
        _, kurt = diagnostics.moment_stats(np.array([-1.0, 1.0, -1.0, 1.0]))
        assert kurt == pytest.approx(-2.0)

    def test_zero_variance_rejected(self):
        with pytest.raises(StatisticError, match="kurtosis"):
            diagnostics.moment_stats(np.ones(10))

    def test_population_divisor(self):
        x = np.array([0.0, 0.0, 3.0])
        skew, _ = diagnostics.moment_stats(x)
        xc = x - x.mean()
        expected = np.mean(xc**3) / np.mean(xc**2) ** 1.5
        assert skew == pytest.approx(expected)


class TestAcf:
    def test_alternating_series_lag_one(self):
        l1, _ = diagnostics.acf_l1(np.array([1.0, -1.0, 1.0, -1.0]), max_lag=1)
        assert l1 == pytest.approx(0.75)

    def test_lag_zero_is_one(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(50)
        xc = x - x.mean()
        rho0 = np.sum(xc * xc) / (len(x) * np.mean(xc**2))
        assert rho0 == pytest.approx(1.0)

    def test_white_noise_l1_small(self):
        rng = np.random.default_rng(1)
        l1, _ = diagnostics.acf_l1(rng.standard_normal(10_000))
        assert l1 < 0.1

    def test_sign_flip_invariance(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(80)
        assert diagnostics.acf_l1(x)[0] == pytest.approx(diagnostics.acf_l1(-x)[0])

    def test_scale_invariance_of_absolute_l1(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(80)
        _, l1_abs = diagnostics.acf_l1(x)
        _, l1_abs_scaled = diagnostics.acf_l1(2.0 * x)
        assert l1_abs_scaled == pytest.approx(l1_abs)

    def test_constant_magnitude_gives_none(self):
        x = np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0])
        l1, l1_abs = diagnostics.acf_l1(x)
        assert l1 > 0
        assert l1_abs is None

    def test_too_short_rejected(self):
        with pytest.raises(StatisticError):
            diagnostics.acf_l1(np.arange(4.0), max_lag=5)


class TestNormalityTests:
    def test_jb_hand_example(self):
        # skew 0, excess kurt -2, n = 4: statistic 2/3, p = exp(-1/3)
        stat, p = diagnostics.jarque_bera(np.array([-1.0, 1.0, -1.0, 1.0]))
        assert stat == pytest.approx(2.0 / 3.0)
        assert p == pytest.approx(np.exp(-1.0 / 3.0), rel=1e-9)

    def test_jb_monotone_in_skew(self):
        previous = 1.0
        n = 50
        for target in (0.2, 0.5, 1.0):
            stat = n / 6.0 * target**2
            from scipy.stats import chi2

            p = chi2.sf(stat, 2)
            assert p < previous
            previous = p

    def test_sw_range_gate(self):
        rng = np.random.default_rng(4)
        sw, jb = diagnostics.normality_tests(rng.standard_normal(6))
        assert sw is None
        assert 0 <= jb <= 1
        sw, _ = diagnostics.normality_tests(rng.standard_normal(20))
        assert 0 <= sw <= 1

    def test_calibration_on_gaussian_noise(self):
        # at the 5% level both tests should reject roughly 5% of the time
        rng = np.random.default_rng(5)
        sw_rejects = jb_rejects = 0
        trials = 400
        for _ in range(trials):
            x = rng.standard_normal(60)
            sw, jb = diagnostics.normality_tests(x)
            sw_rejects += sw < 0.05
            jb_rejects += jb < 0.05
        assert 0.02 <= sw_rejects / trials <= 0.09
        assert 0.01 <= jb_rejects / trials <= 0.10


class TestDescribe:
    def test_report_fields(self):
        rng = np.random.default_rng(6)
        report = diagnostics.describe(rng.standard_normal(97))
        assert report.n == 97
        assert report.stdev == pytest.approx(1.0, abs=0.25)
        assert report.sw_p is not None
        assert report.l1_absolute is not None


class TestCriticalValues:
    def test_determinism(self):
        a = diagnostics.mc_critical_values(20, 0.95, 10_000, seed=3)
        b = diagnostics.mc_critical_values(20, 0.95, 10_000, seed=3)
        assert (a.skew_crit, a.kurt_crit, a.l1_crit) == (b.skew_crit, b.kurt_crit, b.l1_crit)

    def test_monotone_in_level(self):
        lo = diagnostics.mc_critical_values(50, 0.95, 20_000, seed=9)
        hi = diagnostics.mc_critical_values(50, 0.99, 20_000, seed=9)
        assert hi.skew_crit >= lo.skew_crit
        assert hi.kurt_crit >= lo.kurt_crit
        assert hi.l1_crit >= lo.l1_crit

    def test_positive_critical_values(self):
        table = diagnostics.mc_critical_values(30, 0.95, 20_000, seed=11)
        assert table.skew_crit > 0 and table.kurt_crit > 0 and table.l1_crit > 0

    def test_preconditions(self):
        with pytest.raises(StatisticError):
            diagnostics.mc_critical_values(5, 0.95, 20_000, seed=1)
        with pytest.raises(StatisticError):
            diagnostics.mc_critical_values(50, 0.95, 500, seed=1)

    def test_skew_crit_tracks_asymptotics(self):
        # |skew| of Gaussian noise is roughly normal with sd sqrt(6/n)
        table = diagnostics.mc_critical_values(400, 0.95, 20_000, seed=13)
        assert table.skew_crit == pytest.approx(1.96 * np.sqrt(6.0 / 400), rel=0.15)


class TestDriftCheck:
    def test_iid_halves_agree(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(20_000)
        diff, se = diagnostics.two_sample_drift(x[:10_000], x[10_000:])
        assert abs(diff) < 4 * se

    def test_detects_shift(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(20_000)
        diff, se = diagnostics.two_sample_drift(x[:10_000] + 1.0, x[10_000:])
        assert abs(diff) > 10 * se
