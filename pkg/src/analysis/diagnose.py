"""Residual diagnostics: moments, autocorrelation, Ljung-Box, ADF and QQ data."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..data.panel import VolSeries
from ..errors import DegenerateSeries, MisalignedSeries, RankDeficientDesign, TooShort
from . import adf_tables
from .estimate import ArSvModel, LogArFit, fit_log_ar, fit_scalar_ar
from .ols import ols
from .pca import component_name
from .special import chi2_sf, normal_cdf, normal_ppf

logger = logging.getLogger(__name__)

SIGNIFICANCE = 0.05
ADF_MIN_LENGTH = 30
QQ_MIN_LENGTH = 10

SeriesLike = Union[np.ndarray, Sequence[float]]


@dataclass(frozen=True)
class TestResult:
    """Outcome of a hypothesis test; ``decision_at_5pct`` means reject."""

    __test__ = False

    name: str
    statistic: float
    p_value: float
    lags_or_dof: int
    decision_at_5pct: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "test": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "lags_or_dof": self.lags_or_dof,
            "decision_at_5pct": self.decision_at_5pct,
        }


def _result(name: str, statistic: float, p_value: float, lags: int) -> TestResult:
    p_value = min(max(float(p_value), 0.0), 1.0)
    return TestResult(name, float(statistic), p_value, int(lags), p_value < SIGNIFICANCE)


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    std: float
    skewness: float
    kurtosis: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "mean": self.mean,
            "std": self.std,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
        }


@dataclass(frozen=True, eq=False)
class AcfResult:
    """Autocorrelations at lags ``0..max_lag`` and the white-noise band."""

    values: np.ndarray
    band: float

    @property
    def max_lag(self) -> int:
        return len(self.values) - 1


def _series(series: SeriesLike) -> np.ndarray:
    return np.asarray(series, dtype=float).ravel()


def _require_variation(x: np.ndarray) -> None:
    if np.ptp(x) == 0.0:
        raise DegenerateSeries("series has zero variance")


def skew_kurt(series: SeriesLike) -> MomentSummary:
    """Mean, standard deviation, skewness and raw kurtosis (1/N moments)."""
    x = _series(series)
    if len(x) < 4:
        raise TooShort(f"moments need at least 4 points, got {len(x)}")
    _require_variation(x)
    mean = float(x.mean())
    dev = x - mean
    m2 = float(np.mean(dev**2))
    m3 = float(np.mean(dev**3))
    m4 = float(np.mean(dev**4))
    return MomentSummary(
        mean=mean,
        std=math.sqrt(m2),
        skewness=m3 / m2**1.5,
        kurtosis=m4 / m2**2,
    )


def acf(series: SeriesLike, max_lag: int) -> AcfResult:
    """Sample autocorrelations with the lag-0 denominator."""
    x = _series(series)
    if len(x) <= max_lag + 1:
        raise TooShort(f"{len(x)} points cannot support {max_lag} lags")
    _require_variation(x)
    dev = x - x.mean()
    denom = float(dev @ dev)
    values = np.empty(max_lag + 1)
    values[0] = 1.0
    for k in range(1, max_lag + 1):
        values[k] = float(dev[:-k] @ dev[k:]) / denom
    return AcfResult(values=values, band=1.96 / math.sqrt(len(x)))


def ljung_box(series: SeriesLike, lags: int = 10) -> TestResult:
    """Ljung-Box portmanteau test with ``lags`` chi-square degrees of freedom."""
    x = _series(series)
    n = len(x)
    rho = acf(x, lags).values[1:]
    q = n * (n + 2) * float(np.sum(rho**2 / (n - np.arange(1, lags + 1))))
    return _result("ljung_box", q, chi2_sf(q, lags), lags)


def mackinnon_p(stat: float) -> float:
    """Approximate p-value of a Dickey-Fuller t-statistic (constant case)."""
    if stat > adf_tables.TAU_MAX:
        return 1.0
    if stat < adf_tables.TAU_MIN:
        return 0.0
    coefs = adf_tables.SMALL_P if stat <= adf_tables.TAU_STAR else adf_tables.LARGE_P
    return normal_cdf(sum(c * stat**i for i, c in enumerate(coefs)))


def _adf_design(y: np.ndarray, dy: np.ndarray, lags: int, start: int) -> Tuple[np.ndarray, np.ndarray]:
    rows = np.arange(start, len(dy))
    columns = [np.ones(len(rows)), y[rows]]
    columns += [dy[rows - k] for k in range(1, lags + 1)]
    return np.column_stack(columns), dy[rows]


def adf_test(
    series: SeriesLike, max_lag: Optional[int] = None, autolag: Optional[str] = "aic"
) -> TestResult:
    """Augmented Dickey-Fuller test with a constant and no trend.

    Args:
        series: Observations in time order.
        max_lag: Largest augmentation lag; defaults to ``⌊12 (T/100)^¼⌋``.
        autolag: ``"aic"`` picks the lag minimising AIC on a common sample;
            ``None`` uses ``max_lag`` as given.

    Returns:
        TestResult with the t-ratio on ``y(t-1)`` and the chosen lag.

    Raises:
        TooShort: If fewer than 30 observations are given.
    """
    y = _series(series)
    n = len(y)
    if n < ADF_MIN_LENGTH:
        raise TooShort(f"ADF needs at least {ADF_MIN_LENGTH} points, got {n}")
    _require_variation(y)
    if max_lag is None:
        max_lag = int(math.floor(12.0 * (n / 100.0) ** 0.25))
    max_lag = max(0, min(max_lag, n // 2 - 3))
    dy = np.diff(y)

    chosen = max_lag
    if autolag == "aic":
        best = math.inf
        for lags in range(max_lag + 1):
            design, target = _adf_design(y, dy, lags, max_lag)
            try:
                fit = ols(design, target)
            except RankDeficientDesign:
                continue
            nobs = len(target)
            with np.errstate(divide="ignore"):
                aic = nobs * math.log(fit.rss / nobs) if fit.rss > 0 else -math.inf
            aic += 2 * design.shape[1]
            if aic < best:
                best, chosen = aic, lags
        logger.debug("ADF lag %d chosen by AIC (max %d)", chosen, max_lag)
    elif autolag is not None:
        raise ValueError(f"unknown autolag policy {autolag!r}")

    design, target = _adf_design(y, dy, chosen, chosen)
    fit = ols(design, target)
    stat = float(fit.t_stats[1])
    return _result("adf", stat, mackinnon_p(stat), chosen)


def qq_data(series: SeriesLike, standardize: bool = True) -> np.ndarray:
    """Normal QQ points as an ``N x 2`` array of (theoretical, sample).

    Plotting positions are ``(i - 0.5) / N``. Sample values are sorted and,
    when ``standardize`` is set, centred and scaled by the sample standard
    deviation (``N - 1`` denominator).
    """
    x = _series(series)
    if len(x) < QQ_MIN_LENGTH:
        raise TooShort(f"QQ data needs at least {QQ_MIN_LENGTH} points, got {len(x)}")
    _require_variation(x)
    values = np.sort(x)
    if standardize:
        values = (values - x.mean()) / x.std(ddof=1)
    n = len(x)
    theoretical = np.array([normal_ppf((i - 0.5) / n) for i in range(1, n + 1)])
    return np.column_stack([theoretical, values])


@dataclass(frozen=True, eq=False)
class DiagnosticsTable:
    """Skewness and kurtosis of innovations, raw and divided by volatility."""

    components: Tuple[str, ...]
    skew_z: np.ndarray
    skew_zv: np.ndarray
    kurt_z: np.ndarray
    kurt_zv: np.ndarray

    ROW_LABELS = ("Skewness of Z", "Skewness of Z/V", "Kurtosis of Z", "Kurtosis of Z/V")

    def rows(self) -> List[Tuple[str, np.ndarray]]:
        return list(
            zip(self.ROW_LABELS, (self.skew_z, self.skew_zv, self.kurt_z, self.kurt_zv))
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "components": list(self.components),
            "rows": {label: values.tolist() for label, values in self.rows()},
        }

    def format_text(self) -> str:
        width = max(len(label) for label in self.ROW_LABELS)
        header = " " * width + "".join(f"{name:>12}" for name in self.components)
        lines = [header]
        for label, values in self.rows():
            lines.append(f"{label:<{width}}" + "".join(f"{v:>12.2f}" for v in values))
        return "\n".join(lines) + "\n"


def diagnostics_table(
    model: ArSvModel, residuals: np.ndarray, vol: Union[VolSeries, SeriesLike]
) -> DiagnosticsTable:
    """Moments of each component's innovations with and without ``V`` scaling.

    Args:
        model: Model whose components label the columns.
        residuals: ``n x d`` innovations ``Z``.
        vol: Volatility levels aligned with the residual rows.

    Raises:
        MisalignedSeries: If shapes disagree.
    """
    z = np.asarray(residuals, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    v = _series(vol.values if isinstance(vol, VolSeries) else vol)
    if z.shape[0] != len(v):
        raise MisalignedSeries(f"{z.shape[0]} residual rows but {len(v)} volatility points")
    if z.shape[1] != model.d:
        raise MisalignedSeries(f"{z.shape[1]} residual columns for a d={model.d} model")
    raw = [skew_kurt(z[:, i]) for i in range(model.d)]
    scaled = [skew_kurt(z[:, i] / v) for i in range(model.d)]
    return DiagnosticsTable(
        components=tuple(component_name(i) for i in range(model.d)),
        skew_z=np.array([m.skewness for m in raw]),
        skew_zv=np.array([m.skewness for m in scaled]),
        kurt_z=np.array([m.kurtosis for m in raw]),
        kurt_zv=np.array([m.kurtosis for m in scaled]),
    )


def scalar_ar_residuals(scores: np.ndarray) -> np.ndarray:
    """Innovations of a separate AR(1) fit per score column, rows ``t=1..T-1``."""
    scores = np.asarray(scores, dtype=float)
    if scores.ndim == 1:
        scores = scores[:, None]
    return np.column_stack([fit_scalar_ar(scores[:, i]).fit.residuals for i in range(scores.shape[1])])


@dataclass(frozen=True)
class VolDiagnostics:
    """Log-volatility AR fit with residual moments and tests."""

    log_ar: LogArFit
    moments: MomentSummary
    ljung_box_w: TestResult
    ljung_box_abs_w: TestResult
    adf_log_v: TestResult

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.log_ar.alpha,
            "beta": self.log_ar.beta,
            "sigma0": self.log_ar.sigma0,
            "residual_moments": self.moments.to_dict(),
            "ljung_box_W": self.ljung_box_w.to_dict(),
            "ljung_box_abs_W": self.ljung_box_abs_w.to_dict(),
            "adf_log_V": self.adf_log_v.to_dict(),
        }


def vol_diagnostics(vol: Union[VolSeries, SeriesLike], lags: int = 10) -> VolDiagnostics:
    levels = vol.values if isinstance(vol, VolSeries) else _series(vol)
    log_ar = fit_log_ar(levels)
    w = log_ar.fit.residuals
    return VolDiagnostics(
        log_ar=log_ar,
        moments=skew_kurt(w),
        ljung_box_w=ljung_box(w, lags),
        ljung_box_abs_w=ljung_box(np.abs(w), lags),
        adf_log_v=adf_test(np.log(levels)),
    )
