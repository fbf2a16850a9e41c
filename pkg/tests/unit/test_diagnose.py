"""Unit tests for residual diagnostics."""

import numpy as np
import pytest
import scipy.stats

from src.analysis.diagnose import (
    acf,
    adf_test,
    diagnostics_table,
    ljung_box,
    mackinnon_p,
    qq_data,
    scalar_ar_residuals,
    skew_kurt,
    vol_diagnostics,
)
from src.errors import DegenerateSeries, MisalignedSeries, TooShort
from tests.conftest import toy_model


def _ar1(phi: float, n: int, seed: int) -> np.ndarray:
    shocks = np.random.default_rng(seed).standard_normal(n)
    out = np.zeros(n)
    for t in range(1, n):
        out[t] = phi * out[t - 1] + shocks[t]
    return out


class TestSkewKurt:
    def test_alternating_series(self):
        moments = skew_kurt(np.tile([1.0, -1.0], 20))
        assert moments.mean == 0.0
        assert moments.skewness == pytest.approx(0.0, abs=1e-12)
        assert moments.kurtosis == pytest.approx(1.0)

    def test_affine_invariance(self):
        x = np.random.default_rng(0).exponential(size=500)
        base = skew_kurt(x)
        shifted = skew_kurt(3.0 * x + 2.0)
        flipped = skew_kurt(-x)
        assert shifted.skewness == pytest.approx(base.skewness, rel=1e-10)
        assert shifted.kurtosis == pytest.approx(base.kurtosis, rel=1e-10)
        assert flipped.skewness == pytest.approx(-base.skewness, rel=1e-10)

    def test_large_gaussian_sample(self):
        moments = skew_kurt(np.random.default_rng(1).standard_normal(1_000_000))
        assert abs(moments.skewness) < 0.01
        assert moments.kurtosis == pytest.approx(3.0, abs=0.02)

    def test_constant_series(self):
        with pytest.raises(DegenerateSeries):
            skew_kurt(np.full(10, 2.0))

    def test_too_short(self):
        with pytest.raises(TooShort):
            skew_kurt([1.0, 2.0, 3.0])


class TestAcf:
    def test_alternating_lag_one(self):
        result = acf(np.tile([1.0, -1.0], 25), 3)
        assert result.values[0] == 1.0
        assert result.values[1] == pytest.approx(-49.0 / 50.0)
        assert result.values[2] == pytest.approx(48.0 / 50.0)
        assert result.band == pytest.approx(1.96 / np.sqrt(50.0))
        assert result.max_lag == 3

    def test_too_many_lags(self):
        with pytest.raises(TooShort):
            acf(np.arange(5.0), 4)


class TestLjungBox:
    def test_persistent_series_rejected(self):
        result = ljung_box(_ar1(0.9, 500, 3), 10)
        assert result.p_value < 1e-6
        assert result.decision_at_5pct
        assert result.lags_or_dof == 10

    def test_matches_chi_square_tail(self):
        x = np.random.default_rng(4).standard_normal(300)
        result = ljung_box(x, 5)
        assert result.p_value == pytest.approx(scipy.stats.chi2.sf(result.statistic, 5), abs=1e-10)

    def test_zero_autocorrelation_gives_unit_p(self):
        x = np.zeros(40)
        x[0], x[20] = 1.0, -1.0
        result = ljung_box(x, 10)
        assert result.statistic == 0.0
        assert result.p_value == 1.0
        assert not result.decision_at_5pct

    def test_p_value_falls_as_statistic_grows(self):
        results = [ljung_box(_ar1(phi, 300, 8), 10) for phi in (0.0, 0.1, 0.3, 0.6)]
        ordered = sorted(results, key=lambda r: r.statistic)
        p_values = [r.p_value for r in ordered]
        assert p_values == sorted(p_values, reverse=True)
        assert ordered[0].statistic < ordered[-1].statistic


class TestAdf:
    def test_stationary_series_rejects_unit_root(self):
        result = adf_test(_ar1(0.5, 200, 5))
        assert result.statistic < -3.5
        assert result.p_value < 0.01
        assert result.decision_at_5pct

    def test_random_walks_mostly_not_rejected(self):
        kept = 0
        for seed in range(100):
            walk = np.cumsum(np.random.default_rng(100 + seed).standard_normal(200))
            kept += not adf_test(walk).decision_at_5pct
        assert kept >= 85

    def test_fixed_lag(self):
        result = adf_test(_ar1(0.5, 200, 6), max_lag=2, autolag=None)
        assert result.lags_or_dof == 2

    def test_statistic_invariant_under_rescaling(self):
        y = _ar1(0.8, 250, 9)
        base = adf_test(y)
        rescaled = adf_test(40.0 * y + 3.0)
        assert rescaled.lags_or_dof == base.lags_or_dof
        assert rescaled.statistic == pytest.approx(base.statistic, rel=1e-8)
        assert rescaled.p_value == pytest.approx(base.p_value, rel=1e-6, abs=1e-12)

    def test_critical_values(self):
        assert mackinnon_p(-2.86) == pytest.approx(0.05, abs=0.002)
        assert mackinnon_p(-3.43) == pytest.approx(0.01, abs=0.001)
        assert mackinnon_p(5.0) == 1.0
        assert mackinnon_p(-25.0) == 0.0

    def test_too_short(self):
        with pytest.raises(TooShort):
            adf_test(np.random.default_rng(0).standard_normal(29))


class TestQqData:
    def test_exact_quantiles_on_diagonal(self):
        n = 200
        series = scipy.stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
        points = qq_data(series[::-1], standardize=False)
        np.testing.assert_allclose(points[:, 1], points[:, 0], atol=1e-6)

    def test_monotone(self):
        points = qq_data(np.arange(1.0, 11.0))
        assert points.shape == (10, 2)
        assert np.all(np.diff(points[:, 0]) > 0.0)
        assert np.all(np.diff(points[:, 1]) > 0.0)

    def test_heavy_tails_bend_away(self):
        points = qq_data(np.random.default_rng(9).standard_t(3, 5000), standardize=False)
        assert points[-1, 1] > points[-1, 0]
        assert points[0, 1] < points[0, 0]

    def test_too_short(self):
        with pytest.raises(TooShort):
            qq_data(np.arange(5.0))


class TestDiagnosticsTable:
    def test_unit_volatility_rows_match(self):
        z = np.random.default_rng(2).standard_normal((300, 1))
        table = diagnostics_table(toy_model(), z, np.ones(300))
        np.testing.assert_allclose(table.skew_z, table.skew_zv)
        np.testing.assert_allclose(table.kurt_z, table.kurt_zv)
        assert table.components == ("level",)

    def test_volatility_scaling_removes_excess_kurtosis(self):
        rng = np.random.default_rng(12)
        v = np.exp(0.5 * rng.standard_normal(200_000))
        z = (v * rng.standard_normal(200_000))[:, None]
        table = diagnostics_table(toy_model(), z, v)
        assert table.kurt_zv[0] == pytest.approx(3.0, abs=0.1)
        assert table.kurt_z[0] > 3.5

    def test_fitted_model(self, fitted):
        _, model = fitted
        table = diagnostics_table(model, model.estimation.residuals, model.estimation.vol)
        assert table.components == ("level", "slope", "curvature")
        text = table.format_text()
        assert len(text.strip().splitlines()) == 5
        assert "Kurtosis of Z/V" in text
        assert set(table.to_dict()["rows"]) == set(table.ROW_LABELS)

    def test_misaligned(self):
        with pytest.raises(MisalignedSeries):
            diagnostics_table(toy_model(), np.ones((10, 1)), np.ones(9))

    def test_scalar_ar_residuals_shape(self, fitted):
        pca, _ = fitted
        assert scalar_ar_residuals(pca.scores).shape == (pca.T - 1, 3)


class TestVolDiagnostics:
    def test_report_keys(self, vol):
        report = vol_diagnostics(vol).to_dict()
        assert set(report) == {
            "alpha",
            "beta",
            "sigma0",
            "residual_moments",
            "ljung_box_W",
            "ljung_box_abs_W",
            "adf_log_V",
        }
        assert 0.0 < report["beta"] < 1.0
        assert report["ljung_box_W"]["lags_or_dof"] == 10
