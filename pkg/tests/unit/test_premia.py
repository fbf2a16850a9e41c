"""Unit tests for term premia and the CAPM slope."""

import math

import numpy as np
import pytest

from src.errors import DegenerateSeries, MisalignedSeries
from src.returns.bonds import approx_returns, exact_returns, gamma_matrix, quadratic_loading_curve
from src.returns.premia import CapmResult, capm_slope, term_premium
from src.simulation.simulate import simulate_discrete
from tests.conftest import flat_curve, toy_model


def _premia(returns_by_maturity, short):
    return {l: term_premium(q, returns_by_maturity[short]) for l, q in returns_by_maturity.items()}


class TestTermPremium:
    def test_difference(self):
        np.testing.assert_allclose(term_premium([0.02, 0.03], [0.01, 0.01]), [0.01, 0.02])

    def test_identical_legs_give_zero(self):
        returns = np.random.default_rng(4).normal(0.004, 0.01, 500)
        assert np.array_equal(term_premium(returns, returns), np.zeros(500))

    def test_length_mismatch(self):
        with pytest.raises(MisalignedSeries):
            term_premium([0.1, 0.2], [0.1])


class TestCapmResult:
    def test_theoretical_ratios(self):
        result = CapmResult(slope=0.49, stderr=0.01, l=60, l0=120, n_obs=100)
        assert result.theoretical == 0.5
        assert result.theoretical_discrete == pytest.approx(59 / 119)
        assert result.target == result.theoretical_discrete
        assert result.deviation(0.5) == pytest.approx(1.0)
        report = result.to_dict()
        assert report["target"] == pytest.approx(59 / 119)
        assert report["deviation_sigmas"] == pytest.approx((59 / 119 - 0.49) / 0.01)

    def test_short_leg_shifts_discrete_ratio(self):
        result = CapmResult(slope=0.5, stderr=0.01, l=60, l0=120, n_obs=100, short=12)
        assert result.theoretical_discrete == pytest.approx(48 / 108)

    def test_benchmark_equal_to_short_falls_back(self):
        result = CapmResult(slope=1.0, stderr=0.01, l=12, l0=1, n_obs=100)
        assert math.isnan(result.theoretical_discrete)
        assert result.target == 12.0

    def test_zero_stderr_is_floored(self):
        exact = CapmResult(slope=0.5, stderr=0.0, l=60, l0=120, n_obs=10)
        assert exact.deviation(0.5) == 0.0
        assert math.isfinite(exact.deviation(0.4))
        assert exact.deviation(0.4) > 1e6


class TestCapmSlope:
    def test_level_only_model_matches_one_factor_ratio(self):
        path = simulate_discrete(toy_model(), 2000, seed=1)
        gamma = gamma_matrix(flat_curve())
        returns = {l: approx_returns(path.x, gamma, l) for l in (1, 60, 120)}
        premia = _premia(returns, 1)
        result = capm_slope(premia[60], premia[120], 60, 120)
        assert result.slope == pytest.approx(59 / 119, rel=1e-10)
        assert result.to_dict()["deviation_sigmas"] < 3.0
        assert result.n_obs == 2000

    def test_level_only_premium_tracks_level_change(self):
        path = simulate_discrete(toy_model(), 2000, seed=2)
        curve = flat_curve(mean=4.0)
        returns = {l: exact_returns(None, curve, path.x, l) for l in (1, 60)}
        premium = term_premium(returns[60], returns[1])
        change = -np.diff(path.x[:, 0])
        assert np.corrcoef(premium, change)[0, 1] > 0.999

    def test_second_factor_breaks_proportionality(self):
        model = toy_model(
            a=[0.0, 0.0],
            B=np.diag([0.95, 0.9]),
            c=[0.0, 0.0],
            noise_scales=[0.1, 0.1],
        )
        path = simulate_discrete(model, 2000, seed=3)
        gamma = gamma_matrix(quadratic_loading_curve(120, 1.0))
        returns = {l: approx_returns(path.x, gamma, l) for l in (1, 60, 120)}
        premia = _premia(returns, 1)
        result = capm_slope(premia[60], premia[120], 60, 120)
        assert result.slope == pytest.approx(0.25, abs=0.05)
        assert result.deviation(result.theoretical) > 3.0
        assert result.to_dict()["deviation_sigmas"] > 3.0

    def test_invariant_under_common_rescaling(self):
        model = toy_model(
            a=[0.0, 0.0], B=np.diag([0.95, 0.9]), c=[0.0, 0.0], noise_scales=[0.1, 0.1]
        )
        path = simulate_discrete(model, 1000, seed=5)
        gamma = gamma_matrix(quadratic_loading_curve(120, 1.0))
        returns = {l: approx_returns(path.x, gamma, l) for l in (1, 60, 120)}
        premia = _premia(returns, 1)
        base = capm_slope(premia[60], premia[120], 60, 120)
        scaled = capm_slope(7.5 * premia[60], 7.5 * premia[120], 60, 120)
        assert scaled.slope == pytest.approx(base.slope, rel=1e-10)
        assert scaled.stderr == pytest.approx(base.stderr, rel=1e-8)

    def test_zero_benchmark(self):
        with pytest.raises(DegenerateSeries):
            capm_slope([0.1, 0.2, 0.3], [0.0, 0.0, 0.0], 60, 120)

    def test_length_mismatch(self):
        with pytest.raises(MisalignedSeries):
            capm_slope([0.1, 0.2], [0.1], 60, 120)
