"""Shared pytest fixtures for all test suites."""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.analysis.estimate import ArSvModel, fit_arsv
from src.analysis.pca import LoadingCurve, fit_pca
from src.data.panel import RatePanel, VolSeries, YearMonth, month_range

MATURITIES = tuple(range(1, 11))
SNAPSHOT_DIR = Path(__file__).resolve().parent.parent / "data"
SNAPSHOT_RATES = SNAPSHOT_DIR / "treasury_zero_coupon.csv"
SNAPSHOT_VIX = SNAPSHOT_DIR / "vixcls.csv"


def synthetic_market(T: int = 120, seed: int = 7, start: YearMonth = YearMonth(2000, 1)):
    """Three-factor rate panel (percent) and a log-AR volatility series.

    Level, slope and curvature follow independent AR(1) processes; the slope
    shocks scale with volatility so the VIX-scaled row has something to fit.
    """
    rng = np.random.default_rng(seed)
    log_v = np.empty(T)
    log_v[0] = 3.0
    for t in range(1, T):
        log_v[t] = 0.45 + 0.85 * log_v[t - 1] + 0.2 * rng.standard_normal()
    vol = np.exp(log_v)

    factors = np.zeros((T, 3))
    for t in range(1, T):
        factors[t, 0] = 0.95 * factors[t - 1, 0] + 0.25 * rng.standard_normal()
        factors[t, 1] = 0.9 * factors[t - 1, 1] + 0.01 * vol[t] * rng.standard_normal()
        factors[t, 2] = 0.8 * factors[t - 1, 2] + 0.05 * rng.standard_normal()

    m = np.asarray(MATURITIES, dtype=float)
    level = np.ones_like(m)
    slope = (m - 5.5) / 4.5
    curvature = 1.0 - 2.0 * np.abs(slope)
    rates = (
        4.0
        + np.outer(factors[:, 0], level)
        + np.outer(factors[:, 1], slope)
        + np.outer(factors[:, 2], curvature)
        + 0.01 * rng.standard_normal((T, len(m)))
    )
    dates = month_range(start, T)
    return RatePanel(dates, MATURITIES, rates), VolSeries(dates, vol)


def write_market_csv(directory: Path, T: int = 120, seed: int = 7):
    """Write the synthetic market as FRED-style CSV files; returns both paths."""
    panel, vol = synthetic_market(T, seed)
    rates = pd.DataFrame(panel.values, columns=[f"THREEFY{m}" for m in panel.maturities])
    rates.insert(0, "observation_date", [f"{d}-01" for d in panel.dates])
    vix = pd.DataFrame({"observation_date": [f"{d}-01" for d in vol.dates], "VIXCLS": vol.values})
    rates_path = directory / "rates.csv"
    vix_path = directory / "vix.csv"
    rates.to_csv(rates_path, index=False, float_format="%.6f")
    vix.to_csv(vix_path, index=False, float_format="%.4f")
    return rates_path, vix_path


def flat_curve(mean: float = 0.0, max_month: int = 120, loading: float = 1.0) -> LoadingCurve:
    """One-component curve with a constant loading and constant mean rate."""
    months = np.arange(max_month + 1)
    return LoadingCurve(
        months=months,
        gamma=np.full((1, max_month + 1), loading),
        mean_curve=np.full(max_month + 1, mean),
    )


def toy_model(**overrides) -> ArSvModel:
    """Stable one-factor model with stationary mean 1.0 and no VIX feedback."""
    params = dict(
        alpha=0.5,
        beta=0.8,
        a=[0.1],
        B=[[0.9]],
        c=[0.0],
        vix_scaled=(),
        sigma0=0.2,
        noise_scales=[0.2],
    )
    params.update(overrides)
    return ArSvModel(**params)


@pytest.fixture
def market():
    """(RatePanel, VolSeries) over 120 synthetic months."""
    return synthetic_market()


@pytest.fixture
def panel(market):
    return market[0]


@pytest.fixture
def vol(market):
    return market[1]


@pytest.fixture
def fitted(market):
    """PCA and a trivariate AR-SV fit with the slope row VIX-scaled."""
    panel, vol = market
    pca = fit_pca(panel, 3)
    model = fit_arsv(pca.scores, vol, vix_scaled=[2])
    return pca, model


@pytest.fixture
def market_csv(tmp_path):
    """(rates.csv, vix.csv) paths in a temporary directory."""
    return write_market_csv(tmp_path)


@pytest.fixture(scope="session")
def snapshot_paths():
    """Paths of the frozen FRED extract; skips when it is not present."""
    if not (SNAPSHOT_RATES.is_file() and SNAPSHOT_VIX.is_file()):
        pytest.skip("FRED snapshot not present under data/")
    return SNAPSHOT_RATES, SNAPSHOT_VIX
