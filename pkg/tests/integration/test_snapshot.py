"""Reference values on the frozen FRED extract (1990-01..2024-08).

Skipped when ``data/`` does not hold the extract; see data/README.md.
"""

import numpy as np
import pytest

from src.analysis.diagnose import adf_test, diagnostics_table, scalar_ar_residuals, vol_diagnostics
from src.analysis.estimate import check_stability, fit_arsv, fit_scalar_ar
from src.analysis.pca import fit_pca, interpolate_loadings, reconstruct_all
from src.data.panel import align, load_rate_panel, load_vol
from src.returns.bonds import gamma_matrix, return_series
from src.returns.premia import term_premium

pytestmark = pytest.mark.snapshot


@pytest.fixture(scope="module")
def dataset(snapshot_paths):
    rates, vix = snapshot_paths
    return align(load_rate_panel(rates), load_vol(vix))


@pytest.fixture(scope="module")
def pca(dataset):
    return fit_pca(dataset.panel, 3)


class TestPanel:
    def test_shape(self, dataset):
        assert dataset.panel.T == 416
        assert dataset.panel.M == 10
        assert str(dataset.dates[0]) == "1990-01"
        assert str(dataset.dates[-1]) == "2024-08"

    def test_variance_ratios(self, pca):
        np.testing.assert_allclose(pca.variance_ratio, [0.9663, 0.0331, 0.0006], atol=0.003)

    def test_reconstruction_error(self, pca, dataset):
        residual = reconstruct_all(pca) - dataset.panel.values
        assert np.sqrt(np.mean(residual**2)) < 0.05


class TestVolatility:
    def test_log_ar(self, dataset):
        diag = vol_diagnostics(dataset.vol, 10)
        assert diag.log_ar.alpha == pytest.approx(0.34, abs=0.02)
        assert diag.log_ar.beta == pytest.approx(0.88, abs=0.01)
        assert diag.ljung_box_w.p_value == pytest.approx(0.50, abs=0.10)
        assert diag.ljung_box_abs_w.p_value == pytest.approx(0.10, abs=0.10)
        assert diag.adf_log_v.p_value < 0.05


class TestScalarFactors:
    def test_autoregressions(self, pca):
        fits = [fit_scalar_ar(pca.scores[:, i]) for i in range(3)]
        assert fits[0].a == pytest.approx(-0.034, abs=0.005)
        assert fits[0].b == pytest.approx(0.988, abs=0.004)
        assert fits[1].b == pytest.approx(0.984, abs=0.004)
        assert fits[2].b == pytest.approx(0.90, abs=0.01)

    def test_unit_root_decisions(self, pca):
        p = [adf_test(pca.scores[:, i]).p_value for i in range(3)]
        assert p[0] > 0.05
        assert p[1] < 0.05
        assert p[2] < 0.05

    def test_slope_moments(self, pca, dataset):
        model = fit_arsv(pca.scores, dataset.vol, vix_scaled=[2])
        table = diagnostics_table(model, scalar_ar_residuals(pca.scores), dataset.vol.values[1:])
        assert table.skew_z[1] == pytest.approx(-0.8, abs=0.05)
        assert table.kurt_z[1] == pytest.approx(6.49, abs=0.05)
        assert table.skew_zv[1] == pytest.approx(-0.37, abs=0.05)
        assert table.kurt_zv[1] == pytest.approx(4.01, abs=0.05)


class TestArSvFits:
    def test_trivariate(self, pca, dataset):
        model = fit_arsv(pca.scores, dataset.vol, vix_scaled=[2])
        np.testing.assert_allclose(model.a, [0.2844, 0.0667, -0.0054], atol=0.005)
        np.testing.assert_allclose(model.c, [-0.0164, -0.0033, 0.0003], atol=0.005)
        assert model.B[0, 0] == pytest.approx(0.9860, abs=0.005)
        assert model.B[2, 2] == pytest.approx(0.9014, abs=0.005)
        eigenvalues = sorted(re for re, _ in check_stability(model).eigenvalues_B)
        np.testing.assert_allclose(eigenvalues, [0.93, 0.97, 0.98], atol=0.01)

    def test_bivariate(self, pca, dataset):
        model = fit_arsv(pca.scores[:, :2], dataset.vol, vix_scaled=[2])
        assert model.B[0, 0] == pytest.approx(0.9859, abs=0.005)
        assert model.B[1, 1] == pytest.approx(0.9851, abs=0.005)
        np.testing.assert_allclose(model.c, [-0.0172, -0.0039], atol=0.005)


class TestReturns:
    @pytest.fixture(scope="class")
    def series(self, pca, dataset):
        curve = interpolate_loadings(pca)
        gamma = gamma_matrix(curve)
        return {
            l: return_series(dataset.panel, curve, gamma, pca.scores, l) for l in (12, 120)
        }

    def test_first_order_matches_exact(self, series):
        ten_year = series[120]
        assert np.corrcoef(ten_year.exact, ten_year.approx)[0, 1] > 0.999
        assert np.mean(np.abs(ten_year.gap)) < 0.0002

    def test_term_premium_positive(self, series):
        assert term_premium(series[120].exact, series[12].exact).mean() > 0.0
