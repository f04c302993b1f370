import numpy as np
import pytest

from trisim import econometrics as ec
from trisim.dataio import AnnualSeries, difference, lagged
from trisim.econometrics import FitError


def series(name, start, values, units="dimensionless"):
    return AnnualSeries(name, start, np.asarray(values, dtype=float), units)


class TestOls:
    def test_perfect_fit(self):
        x = np.arange(5.0)
        fit = ec.ols(np.column_stack([np.ones(5), x]), 2.0 * x + 1.0, ("const", "x"))
        assert fit.coefficients == pytest.approx([1.0, 2.0], abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.residuals == pytest.approx(np.zeros(5), abs=1e-12)

    def test_consistency_with_noise(self):
        rng = np.random.default_rng(0)
        n = 10_000
        x = rng.standard_normal(n)
        y = x + rng.standard_normal(n)
        fit = ec.ols(np.column_stack([np.ones(n), x]), y, ("const", "x"))
        assert abs(fit.coefficient("x") - 1.0) < 3 * fit.stderr("x")

    def test_rank_deficiency_names_columns(self):
        x = np.arange(6.0)
        design = np.column_stack([np.ones(6), x, 2.0 * x])
        with pytest.raises(FitError, match="double"):
            ec.ols(design, x, ("const", "x", "double"))

    def test_residual_mean_zero_with_intercept(self):
        rng = np.random.default_rng(1)
        design = np.column_stack([np.ones(40), rng.standard_normal(40)])
        fit = ec.ols(design, rng.standard_normal(40), ("const", "x"))
        assert np.mean(fit.residuals) == pytest.approx(0.0, abs=1e-10)

    def test_t_stats_match_coefficients_over_stderrs(self):
        rng = np.random.default_rng(2)
        design = np.column_stack([np.ones(30), rng.standard_normal(30)])
        fit = ec.ols(design, rng.standard_normal(30), ("const", "x"))
        assert fit.t_stats == pytest.approx(fit.coefficients / fit.stderrs)


class TestAr1:
    def test_exact_recursion(self):
        values = [1.0]
        for _ in range(20):
            values.append(0.5 * values[-1] + 1.0)
        fit = ec.fit_ar1(series("x", 2000, values))
        assert fit.intercept == pytest.approx(1.0, abs=1e-9)
        assert fit.slope == pytest.approx(0.5, abs=1e-9)
        assert fit.residuals.values == pytest.approx(np.zeros(20), abs=1e-9)

    def test_log_scale_requires_positive(self):
        with pytest.raises(FitError, match="2003"):
            ec.fit_ar1(series("x", 2000, [1.0, 2.0, 1.0, -1.0] + [1.0] * 8), log_scale=True)

    def test_residuals_orthogonal_to_lag(self):
        rng = np.random.default_rng(3)
        x = [0.0]
        for _ in range(199):
            x.append(0.7 * x[-1] + rng.standard_normal())
        fit = ec.fit_ar1(series("x", 1900, x))
        lag = np.asarray(x[:-1])
        corr = np.corrcoef(fit.residuals.values, lag)[0, 1]
        assert abs(corr) < 1e-8

    def test_random_walk_null_not_rejected(self):
        rng = np.random.default_rng(4)
        x = np.cumsum(rng.standard_normal(200))
        fit = ec.fit_ar1(series("x", 1800, x))
        assert fit.p_value_slope_one > 0.001

    def test_residual_years(self):
        fit = ec.fit_ar1(series("x", 2000, np.linspace(1, 2, 12) + 0.01 * np.sin(np.arange(12))))
        assert fit.residuals.start_year == 2001
        assert fit.residuals.end_year == 2011


class TestBondFit:
    def test_exact_recovery(self):
        rng = np.random.default_rng(5)
        rate = series("rate", 2000, 5.0 + np.cumsum(rng.normal(0, 0.3, 30)), "percent")
        change = difference(rate)
        b_values = 0.01 * rate.values[:-1] - 0.02 - 0.05 * change.values
        bond = series("bond", 2001, b_values, "log-return")
        fit = ec.fit_bond(bond, rate)
        assert fit.default_cost == pytest.approx(0.02, abs=1e-10)
        assert fit.duration == pytest.approx(0.05, abs=1e-10)
        assert fit.residuals.values == pytest.approx(np.zeros(29), abs=1e-10)

    def test_constant_rate_is_degenerate(self):
        rate = series("rate", 2000, np.full(30, 5.0), "percent")
        bond = series("bond", 2001, np.full(29, 0.03), "log-return")
        with pytest.raises(FitError, match="rate_change"):
            ec.fit_bond(bond, rate)

    def test_insufficient_overlap(self):
        rate = series("rate", 2000, np.linspace(5, 6, 30), "percent")
        bond = series("bond", 2025, [0.03, 0.04, 0.05], "log-return")
        with pytest.raises(FitError, match="10 years"):
            ec.fit_bond(bond, rate)


class TestValuation:
    def test_identities_hold_exactly(self):
        slope_b, trend_c, mean_h = ec.valuation_from_regression(0.023893, 0.008608, 0.190133)
        assert slope_b == 1.0 - 0.190133
        assert trend_c == pytest.approx(0.04527, abs=1e-4)
        assert mean_h == pytest.approx(-0.1124, abs=1e-3)

    def test_gamma_zero_unidentified(self):
        with pytest.raises(FitError, match="cannot identify"):
            ec.valuation_from_regression(0.01, 0.001, 0.0)

    def _synthetic(self, seed, n=120, slope=0.8, trend=0.05, mean=-0.1, noise=0.15):
        rng = np.random.default_rng(seed)
        h = [mean]
        for _ in range(n):
            h.append(mean + slope * (h[-1] - mean) + noise * rng.standard_normal())
        h = np.asarray(h)
        diff = np.diff(h) + trend  # return-minus-growth differences
        g_bar = rng.normal(0.02, 0.01, n)
        q = diff + g_bar
        e_bar = np.exp(-h[0] + 0.0) * np.ones(n + 1)  # anchor consistency only
        return (
            series("domestic", 1901, q, "log-return"),
            series("avg_growth", 1901, g_bar, "log-return"),
            series("avg_earnings", 1900, e_bar, "index-level"),
            slope,
            trend,
        )

    def test_synthetic_recovery(self):
        q, g_bar, e_bar, slope, trend = self._synthetic(seed=6)
        params = ec.fit_valuation(q, g_bar, e_bar, window=10)
        se_gamma = params.fit.stderr("cumulative")
        assert abs(params.gamma - (1 - slope)) < 3 * se_gamma
        assert params.trend_c == pytest.approx(trend, abs=0.03)
        params.verify_identities()

    def test_h_series_anchor_and_recursion(self):
        q, g_bar, e_bar, *_ = self._synthetic(seed=7)
        params = ec.fit_valuation(q, g_bar, e_bar, window=10)
        h = params.h_series
        assert h.start_year == 1900
        assert h.values[0] == pytest.approx(-np.log(e_bar.value(1900)))
        # one step of the defining recursion
        step = h.value(1905) - h.value(1904)
        assert step == pytest.approx(q.value(1905) - g_bar.value(1905) - params.trend_c, abs=1e-12)

    def test_needs_twenty_years(self):
        q, g_bar, e_bar, *_ = self._synthetic(seed=8, n=15)
        with pytest.raises(FitError, match="20"):
            ec.fit_valuation(q, g_bar, e_bar, window=10)


class TestScaledFit:
    def test_constant_vol_reduces_to_plain_ols(self):
        # scaling by a constant is a no-op: the weighted design without the
        # volatility column recovers exactly the unscaled OLS coefficients
        rng = np.random.default_rng(9)
        n = 60
        x = rng.standard_normal(n)
        y = 0.3 + 0.5 * x + 0.1 * rng.standard_normal(n)
        v = np.full(n, 7.0)
        scaled = ec.ols(np.column_stack([1 / v, x / v]), y / v, ("intercept", "x"))
        plain = ec.ols(np.column_stack([np.ones(n), x]), y, ("intercept", "x"))
        assert scaled.coefficients == pytest.approx(plain.coefficients, abs=1e-8)
        assert scaled.residuals * v == pytest.approx(plain.residuals, abs=1e-10)

    def test_constant_vol_full_design_is_degenerate(self):
        # with the volatility column included, a constant volatility makes
        # the intercept and volatility columns collinear
        rng = np.random.default_rng(9)
        n = 60
        x = rng.standard_normal(n)
        y = 0.3 + 0.5 * x + 0.1 * rng.standard_normal(n)
        vol = series("volatility", 2000, np.full(n, 7.0), "percent")
        with pytest.raises(FitError, match="collinear"):
            ec.fit_scaled(series("y", 2000, y), [("x", series("x", 2000, x))], vol)

    def test_synthetic_recovery_with_vol_noise(self):
        rng = np.random.default_rng(10)
        n = 400
        vol_values = np.exp(rng.normal(2.2, 0.4, n))
        z = rng.normal(0, 0.01, n)
        y = 0.1 + 0.02 * vol_values + vol_values * z
        fit = ec.fit_scaled(
            series("y", 1800, y), [], series("volatility", 1800, vol_values, "percent")
        )
        assert abs(fit.intercept - 0.1) < 3 * fit.fit.stderr("intercept")
        assert abs(fit.vol_coef - 0.02) < 3 * fit.fit.stderr("volatility")
        assert np.std(fit.residuals.values) == pytest.approx(0.01, rel=0.15)

    def test_zero_vol_rejected(self):
        vol = series("volatility", 2000, [1.0, 0.0, 2.0], "percent")
        y = series("y", 2000, [0.1, 0.2, 0.3])
        with pytest.raises(FitError, match="2001"):
            ec.fit_scaled(y, [], vol)

    def test_residuals_are_homoskedastic_noise(self):
        rng = np.random.default_rng(11)
        n = 200
        vol_values = np.exp(rng.normal(2.2, 0.4, n))
        z = rng.normal(0, 0.02, n)
        y = 0.05 + vol_values * z
        fit = ec.fit_scaled(series("y", 1800, y), [], series("volatility", 1800, vol_values, "percent"))
        # residuals should track z, not vol * z
        assert np.corrcoef(np.abs(fit.residuals.values), vol_values)[0, 1] < 0.2


class TestLagSelection:
    def test_window_one_matches_plain_growth(self, bundled_series):
        rows = ec.lag_selection(
            bundled_series["domestic"], bundled_series["earnings"], windows=(1,)
        )
        assert rows[0].window == 1
        from trisim import dataio

        g = dataio.log_growth(bundled_series["earnings"], "growth")
        g_bar = dataio.log_growth(dataio.trailing_average(bundled_series["earnings"], 1), "avg")
        assert g_bar.values == pytest.approx(g.values)

    def test_reports_all_windows(self, bundled_series):
        rows = ec.lag_selection(bundled_series["domestic"], bundled_series["earnings"])
        assert [r.window for r in rows] == list(range(1, 11))
        for row in rows:
            assert 0 <= row.r_squared <= 1
            assert row.report.n == 97


class TestGate:
    def test_unstable_slope_fails(self):
        gate = ec.check_stationarity(1.2, 0.5, 0.5, 0.15)
        assert not gate.passed
        failed = {c.name for c in gate.conditions if not c.ok}
        assert failed == {"vol_slope"}

    def test_valuation_loading_bounds(self):
        assert not ec.check_stationarity(0.5, 0.5, 0.5, -0.1).passed
        assert not ec.check_stationarity(0.5, 0.5, 0.5, 2.3).passed
        assert ec.check_stationarity(0.5, 0.5, 0.5, 1.9).passed


class TestModelSpec:
    def test_json_round_trip(self, bundled_model, tmp_path):
        path = tmp_path / "model.json"
        bundled_model.save(path)
        back = ec.ModelSpec.load(path)
        assert back.to_dict() == bundled_model.to_dict()

    def test_bundled_gate_passes(self, bundled_model):
        assert bundled_model.gate.passed

    def test_bundled_coefficients_plausible(self, bundled_model):
        m = bundled_model
        assert 0.3 < m.vol.slope < 0.9
        assert abs(m.rate.slope) < 1
        assert abs(m.spread.slope) < 1
        assert 0 < m.valuation_loading < 2
        assert m.bond.duration > 0
        assert 0 < m.valuation.gamma < 1
        assert 0.02 < m.valuation.trend_c < 0.07
        m.valuation.verify_identities(tol=1e-10)

    def test_residual_columns_mean_zero(self, bundled_model):
        values = bundled_model.residuals.values
        for j in range(values.shape[1]):
            column = values[:, j]
            observed = column[~np.isnan(column)]
            assert np.mean(observed) == pytest.approx(0.0, abs=1e-8)

    def test_residuals_uncorrelated_with_ar_lag(self, bundled_series, bundled_model):
        # AR(1) residuals must be orthogonal to the lagged regressor
        log_vol = np.log(bundled_series["volatility"].values)
        resid = bundled_model.residuals.column("vol")
        resid = resid[~np.isnan(resid)]
        assert abs(np.corrcoef(resid, log_vol[:-1])[0, 1]) < 1e-8

    def test_correlation_matrix_shape(self, bundled_model):
        corr = bundled_model.residuals.correlation
        assert corr.shape == (8, 8)
        assert np.allclose(np.diag(corr), 1.0)
        assert np.allclose(corr, corr.T)


class TestSimpleModel:
    def test_fit_simple_on_bundled_data(self, bundled_series):
        simple = ec.fit_simple(bundled_series)
        assert simple.corr5.shape == (5, 5)
        assert simple.corr3.shape == (3, 3)
        assert np.allclose(np.diag(simple.corr5), 1.0)
        assert np.allclose(simple.corr5, simple.corr5.T)
        assert np.isfinite(simple.normalized_mean_domestic)
        assert np.isfinite(simple.normalized_mean_intl)
        # the duration equations respond negatively to rate increases
        assert simple.bond.duration > 0
