"""Estimation of the VIX log-autoregression and the AR-SV factor model.

The factor model for ``X(t)`` (principal-component scores) is

    X(t) = a + B X(t-1) + c V(t) + ξ(t) Z(t)
    ln V(t) = α + β ln V(t-1) + Z0(t)

where ``ξ(t)`` is diagonal with ``V(t)`` on the components listed in
``vix_scaled`` and 1 elsewhere. All fits are plain OLS; rows with
volatility-scaled noise are divided through by ``V(t)`` first.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from ..data.panel import VolSeries
from ..errors import InvalidModel, MisalignedSeries, TooShort
from .linalg import eigenvalues
from .ols import OlsFit, ols

logger = logging.getLogger(__name__)

MIN_LENGTH = 24
INNOVATION_LAWS = ("gaussian", "laplace", "student_t")
DYNAMICS = ("discrete", "continuous")

SeriesLike = Union[VolSeries, np.ndarray, List[float]]


class LogArFit(NamedTuple):
    alpha: float
    beta: float
    sigma0: float
    fit: OlsFit


class ScalarArFit(NamedTuple):
    a: float
    b: float
    fit: OlsFit


@dataclass(frozen=True, eq=False)
class ArSvFit:
    """Per-equation regression output kept alongside a fitted model."""

    vol_fit: OlsFit
    row_fits: Tuple[OlsFit, ...]
    residuals: np.ndarray
    normalized_residuals: np.ndarray
    vol: np.ndarray


@dataclass(frozen=True, eq=False)
class ArSvModel:
    """Parameters of the AR model with observed stochastic volatility.

    ``vix_scaled`` holds 1-based component indices. ``residual_cov`` is the
    ``(d+1) x (d+1)`` covariance of ``(Z0, Z_1..Z_d)`` with the scaled
    components' noise measured after division by ``V``; when omitted it is
    taken as diagonal with ``sigma0`` and ``noise_scales``.
    """

    alpha: float
    beta: float
    a: np.ndarray
    B: np.ndarray
    c: np.ndarray
    vix_scaled: FrozenSet[int]
    sigma0: float
    noise_scales: np.ndarray
    residual_cov: Optional[np.ndarray] = None
    innovation: str = "gaussian"
    innovation_df: float = 0.0
    dynamics: str = "discrete"
    estimation: Optional[ArSvFit] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        d = a.shape[0]
        B = np.asarray(self.B, dtype=float)
        if B.size != d * d:
            raise InvalidModel(f"B must be {d}x{d}, got shape {B.shape}")
        B = B.reshape(d, d)
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        scales = np.atleast_1d(np.asarray(self.noise_scales, dtype=float))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "sigma0", float(self.sigma0))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "noise_scales", scales)
        object.__setattr__(self, "vix_scaled", frozenset(int(i) for i in self.vix_scaled))
        if self.residual_cov is not None:
            cov = np.asarray(self.residual_cov, dtype=float)
            if cov.shape != (d + 1, d + 1):
                raise InvalidModel(f"residual_cov must be {d + 1}x{d + 1}, got {cov.shape}")
            object.__setattr__(self, "residual_cov", cov)

        if c.shape != (d,) or scales.shape != (d,):
            raise InvalidModel("a, c and noise_scales must share one length")
        finite = [self.alpha, self.beta, self.sigma0, *a, *B.ravel(), *c, *scales]
        if not np.all(np.isfinite(finite)):
            raise InvalidModel("model parameters must be finite")
        if self.sigma0 <= 0.0 or np.any(scales <= 0.0):
            raise InvalidModel("sigma0 and noise_scales must be positive")
        if not self.vix_scaled <= set(range(1, d + 1)):
            raise InvalidModel(f"vix_scaled {sorted(self.vix_scaled)} outside 1..{d}")
        if self.innovation not in INNOVATION_LAWS:
            raise InvalidModel(f"unknown innovation law {self.innovation!r}")
        if self.innovation == "student_t" and self.innovation_df <= 2.0:
            raise InvalidModel("student_t innovations need innovation_df > 2")
        if self.dynamics not in DYNAMICS:
            raise InvalidModel(f"unknown dynamics {self.dynamics!r}")

    @property
    def d(self) -> int:
        return self.a.shape[0]

    @property
    def scaled_mask(self) -> np.ndarray:
        """Boolean mask over components carrying ``V(t)``-scaled noise."""
        return np.array([(i + 1) in self.vix_scaled for i in range(self.d)])

    @property
    def covariance(self) -> np.ndarray:
        """Innovation covariance of ``(Z0, Z_1..Z_d)``."""
        if self.residual_cov is not None:
            return self.residual_cov
        return np.diag(np.concatenate([[self.sigma0**2], self.noise_scales**2]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ArSvModel):
            return NotImplemented
        return (
            self.alpha == other.alpha
            and self.beta == other.beta
            and self.sigma0 == other.sigma0
            and self.vix_scaled == other.vix_scaled
            and self.innovation == other.innovation
            and self.innovation_df == other.innovation_df
            and self.dynamics == other.dynamics
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.B, other.B)
            and np.array_equal(self.c, other.c)
            and np.array_equal(self.noise_scales, other.noise_scales)
            and np.array_equal(self.covariance, other.covariance)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class StabilityReport:
    spectral_radius_B: float
    eigenvalues_B: Tuple[Tuple[float, float], ...]
    beta_in_unit: bool
    stationary_ok: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spectral_radius_B": self.spectral_radius_B,
            "eigenvalues_B": [list(pair) for pair in self.eigenvalues_B],
            "beta_in_unit": self.beta_in_unit,
            "stationary_ok": self.stationary_ok,
        }


@dataclass(frozen=True)
class ContinuousStabilityReport:
    """Mean-reversion check for the continuous-time reading of a model."""

    min_real_part: float
    beta_positive: bool
    ok: bool


def _values(series: SeriesLike) -> np.ndarray:
    if isinstance(series, VolSeries):
        return np.asarray(series.values, dtype=float)
    return np.asarray(series, dtype=float).ravel()


def _require_length(values: np.ndarray, what: str) -> None:
    if len(values) < MIN_LENGTH:
        raise TooShort(f"{what} has {len(values)} points, need {MIN_LENGTH}")


def fit_log_ar(vol: SeriesLike) -> LogArFit:
    """AR(1) of ``ln V(t)`` on ``[1, ln V(t-1)]``.

    Returns:
        ``(alpha, beta, sigma0, fit)`` with ``sigma0`` the dof-corrected
        residual standard deviation.
    """
    levels = _values(vol)
    _require_length(levels, "volatility series")
    log_v = np.log(levels)
    design = np.column_stack([np.ones(len(log_v) - 1), log_v[:-1]])
    fit = ols(design, log_v[1:], names=("alpha", "beta"))
    alpha, beta = (float(v) for v in fit.coefficients)
    logger.info("Log-vol AR: alpha=%.4f beta=%.4f sigma0=%.4f", alpha, beta, fit.sigma)
    return LogArFit(alpha, beta, fit.sigma, fit)


def fit_scalar_ar(score: SeriesLike) -> ScalarArFit:
    """AR(1) of one score series on ``[1, P(t-1)]``."""
    values = _values(score)
    _require_length(values, "score series")
    design = np.column_stack([np.ones(len(values) - 1), values[:-1]])
    fit = ols(design, values[1:], names=("a", "b"))
    a, b = (float(v) for v in fit.coefficients)
    return ScalarArFit(a, b, fit)


def fit_arsv(
    scores: np.ndarray,
    vol: SeriesLike,
    vix_scaled: Iterable[int] = (),
    diagonal_b: bool = False,
    diagonal_sigma: bool = False,
    vol_feedback: bool = True,
) -> ArSvModel:
    """Fit the AR-SV model row by row.

    Rows outside ``vix_scaled`` regress ``P_i(t)`` on ``[1, P(t-1), V(t)]``.
    Rows inside it are divided by ``V(t)`` and regress ``P_i(t)/V(t)`` on
    ``[1/V(t), P(t-1)/V(t), 1]``, which returns the same ``(a_i, B_i, c_i)``
    parameterisation. With ``diagonal_b`` only the own lag enters. Without
    ``vol_feedback`` the ``V(t)`` regressor (the constant after division) is
    left out and ``c = 0``.

    Args:
        scores: ``T x d`` score matrix (or a length-T vector for d=1).
        vol: Volatility levels aligned with ``scores``.
        vix_scaled: 1-based components with ``V(t)``-scaled noise.
        diagonal_b: Restrict ``B`` to its diagonal.
        diagonal_sigma: Zero the off-diagonal innovation covariance.
        vol_feedback: Keep the ``c·V(t)`` drift term.

    Raises:
        MisalignedSeries: If ``scores`` and ``vol`` differ in length.
        TooShort: If fewer than 24 observations are available.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim == 1:
        scores = scores[:, None]
    levels = _values(vol)
    T, d = scores.shape
    if len(levels) != T:
        raise MisalignedSeries(f"{T} score rows but {len(levels)} volatility points")
    _require_length(levels, "aligned sample")
    scaled = frozenset(int(i) for i in vix_scaled)
    if not scaled <= set(range(1, d + 1)):
        raise InvalidModel(f"vix_scaled {sorted(scaled)} outside 1..{d}")

    log_fit = fit_log_ar(levels)
    v_now = levels[1:]
    lagged = scores[:-1]
    ones = np.ones(T - 1)

    a = np.zeros(d)
    B = np.zeros((d, d))
    c = np.zeros(d)
    noise_scales = np.zeros(d)
    raw = np.zeros((T - 1, d))
    normalized = np.zeros((T - 1, d))
    row_fits: List[OlsFit] = []

    for i in range(d):
        columns = [i] if diagonal_b else list(range(d))
        names = ["a", *(f"B[{i + 1},{j + 1}]" for j in columns)]
        row_scaled = (i + 1) in scaled
        if row_scaled:
            blocks = [1.0 / v_now[:, None], lagged[:, columns] / v_now[:, None]]
            feedback, target = ones, scores[1:, i] / v_now
        else:
            blocks = [ones[:, None], lagged[:, columns]]
            feedback, target = v_now, scores[1:, i]
        if vol_feedback:
            blocks.append(feedback[:, None])
            names.append("c")
        fit = ols(np.hstack(blocks), target, names=tuple(names))
        normalized[:, i] = fit.residuals
        raw[:, i] = fit.residuals * v_now if row_scaled else fit.residuals
        a[i] = fit.coefficients[0]
        B[i, columns] = fit.coefficients[1 : len(columns) + 1]
        if vol_feedback:
            c[i] = fit.coefficients[-1]
        noise_scales[i] = fit.sigma
        row_fits.append(fit)

    scales = np.concatenate([[log_fit.sigma0], noise_scales])
    if diagonal_sigma:
        correlation = np.eye(d + 1)
    else:
        stacked = np.column_stack([log_fit.fit.residuals, normalized])
        with np.errstate(invalid="ignore", divide="ignore"):
            correlation = np.corrcoef(stacked, rowvar=False)
        correlation = np.nan_to_num(np.atleast_2d(correlation), nan=0.0)
        np.fill_diagonal(correlation, 1.0)
    residual_cov = np.outer(scales, scales) * correlation

    model = ArSvModel(
        alpha=log_fit.alpha,
        beta=log_fit.beta,
        a=a,
        B=B,
        c=c,
        vix_scaled=scaled,
        sigma0=log_fit.sigma0,
        noise_scales=noise_scales,
        residual_cov=residual_cov,
        estimation=ArSvFit(
            vol_fit=log_fit.fit,
            row_fits=tuple(row_fits),
            residuals=raw,
            normalized_residuals=normalized,
            vol=v_now,
        ),
    )
    logger.info(
        "AR-SV fit d=%d scaled=%s: a=%s c=%s diag(B)=%s",
        d, sorted(scaled), np.round(a, 4), np.round(c, 4), np.round(np.diag(B), 4),
    )
    return model


def model_residuals(model: ArSvModel, scores: np.ndarray, vol: SeriesLike) -> np.ndarray:
    """Innovations ``Z(t) = X(t) - a - B X(t-1) - c V(t)`` for ``t = 1..T-1``.

    Used when a model is read back from file and its in-sample fit is gone.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim == 1:
        scores = scores[:, None]
    levels = _values(vol)
    if scores.shape[0] != len(levels):
        raise MisalignedSeries(f"{scores.shape[0]} score rows but {len(levels)} volatility points")
    if scores.shape[1] != model.d:
        raise MisalignedSeries(f"{scores.shape[1]} score columns for a d={model.d} model")
    return scores[1:] - model.a - scores[:-1] @ model.B.T - np.outer(levels[1:], model.c)


def check_stability(model: ArSvModel) -> StabilityReport:
    """Discrete-time stationarity: ``ρ(B) < 1`` and ``0 < β < 1``."""
    values = eigenvalues(model.B)
    radius = float(np.abs(values).max())
    beta_ok = 0.0 < model.beta < 1.0
    return StabilityReport(
        spectral_radius_B=radius,
        eigenvalues_B=tuple((float(v.real), float(v.imag)) for v in values),
        beta_in_unit=beta_ok,
        stationary_ok=bool(radius < 1.0 and beta_ok),
    )


def check_continuous(model: ArSvModel) -> ContinuousStabilityReport:
    """Continuous-time mean reversion: ``Re λ(B) > 0`` and ``β > 0``."""
    min_real = float(eigenvalues(model.B).real.min())
    beta_ok = model.beta > 0.0
    return ContinuousStabilityReport(min_real, beta_ok, bool(min_real > 0.0 and beta_ok))


def to_continuous(model: ArSvModel) -> ArSvModel:
    """Read a monthly discrete fit as an SDE with a one-month time unit.

    ``B_ct = I - B``, ``β_ct = 1 - β``; ``α``, ``a``, ``c`` and the innovation
    covariance carry over unchanged.
    """
    if model.dynamics == "continuous":
        raise InvalidModel("model is already in continuous-time form")
    return replace(
        model,
        B=np.eye(model.d) - model.B,
        beta=1.0 - model.beta,
        dynamics="continuous",
        estimation=None,
    )


def coefficient_table(model: ArSvModel) -> List[Dict[str, Any]]:
    """Estimate, standard error, t and p for every fitted coefficient."""
    if model.estimation is None:
        return []
    rows: List[Dict[str, Any]] = []
    for row in model.estimation.vol_fit.table():
        rows.append({"equation": "lnV", **row})
    for i, fit in enumerate(model.estimation.row_fits):
        for row in fit.table():
            rows.append({"equation": f"P{i + 1}", **row})
    return rows
