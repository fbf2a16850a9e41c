"""Zero-coupon pricing, monthly holding returns and their factor approximation.

Maturities are indexed in months ``l`` and priced with ``τ = l/12`` years.
Rates are percent per annum everywhere outside this module's arithmetic,
which converts to decimals internally.

The one-month log return of the maturity-``l`` bond bought at ``t-1`` is

    Q_l(t) = -(τ - 1/12)·ln(1 + ρ_{l-1}(t)) + τ·ln(1 + ρ_l(t-1))

and replacing ``ln(1 + x)`` by ``x`` with ``ρ_l = μ_l + Σ_i γ_il P_i`` gives

    Q*_l(t) = Σ_i [Γ_il·P_i(t-1) - Γ_i,l-1·P_i(t)] + (τ_l μ_l - τ_l-1 μ_l-1)

with ``Γ_il = τ_l·γ_il``. The last bracket is the carry from the PCA mean.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from ..analysis.estimate import ArSvModel
from ..analysis.pca import LoadingCurve
from ..data.panel import RatePanel, YearMonth
from ..errors import ConfigError, InvalidRate, MaturityOutOfRange, MisalignedSeries
from ..simulation.lln import (
    DEFAULT_ATOL,
    LlnReport,
    ReplicationAverage,
    checkpoint_steps,
    run_replications,
    running_average,
    simulate_path,
    summarize,
)
from ..simulation.simulate import stationary_mean_continuous, stationary_mean_discrete

logger = logging.getLogger(__name__)

MONTHS_PER_YEAR = 12.0

ArrayLike = Union[float, np.ndarray]


def price_zero(rate: ArrayLike, tau: ArrayLike) -> ArrayLike:
    """Price ``(1 + rate)^(-tau)`` of a unit zero-coupon bond.

    Args:
        rate: Decimal annual rate(s), each above -1.
        tau: Time(s) to maturity in years, nonnegative.

    Raises:
        InvalidRate: If a rate is at or below -100% or a maturity is negative.
    """
    r = np.asarray(rate, dtype=float)
    t = np.asarray(tau, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r <= -1.0):
        raise InvalidRate(f"rates must be finite and above -1, got {rate!r}")
    if np.any(t < 0.0):
        raise InvalidRate(f"time to maturity must be nonnegative, got {tau!r}")
    price = np.exp(-t * np.log1p(r))
    return float(price) if price.ndim == 0 else price


@dataclass(frozen=True, eq=False)
class GammaMatrix:
    """Duration-weighted loadings ``Γ_il = (l/12)·γ_il``.

    ``gamma`` and ``diff`` are ``d x (L+1)``; ``diff[:, l] = Γ_l - Γ_{l-1}``
    with column 0 zero. ``carry[l]`` is ``τ_l μ_l - τ_{l-1} μ_{l-1}`` in
    percent-years.
    """

    gamma: np.ndarray
    diff: np.ndarray
    carry: np.ndarray

    @property
    def d(self) -> int:
        return self.gamma.shape[0]

    @property
    def max_month(self) -> int:
        return self.gamma.shape[1] - 1

    def check_maturity(self, l: int) -> int:
        if not 1 <= l <= self.max_month:
            raise MaturityOutOfRange(l, 1, self.max_month)
        return int(l)


def gamma_matrix(curve: LoadingCurve) -> GammaMatrix:
    """Γ on the curve's monthly grid with backward differences and carry."""
    tau = np.asarray(curve.months, dtype=float) / MONTHS_PER_YEAR
    gamma = curve.gamma * tau
    diff = np.zeros_like(gamma)
    diff[:, 1:] = np.diff(gamma, axis=1)
    weighted_mean = tau * curve.mean_curve
    carry = np.zeros_like(weighted_mean)
    carry[1:] = np.diff(weighted_mean)
    return GammaMatrix(gamma=gamma, diff=diff, carry=carry)


def _check_maturity(curve: LoadingCurve, l: int) -> int:
    if not 1 <= l <= curve.max_month:
        raise MaturityOutOfRange(l, 1, curve.max_month)
    return int(l)


def _scores(scores: np.ndarray, d: int) -> np.ndarray:
    scores = np.asarray(scores, dtype=float)
    if scores.ndim == 1:
        scores = scores[:, None]
    if scores.shape[1] != d:
        raise MisalignedSeries(f"{scores.shape[1]} score columns for {d} loading rows")
    if scores.shape[0] < 2:
        raise MisalignedSeries("returns need scores at two or more dates")
    return scores


def exact_returns(
    panel: Optional[RatePanel], curve: LoadingCurve, scores: np.ndarray, l: int
) -> np.ndarray:
    """Monthly log returns ``Q_l(t)``, ``t = 1..T-1``, as decimals.

    Args:
        panel: Panel the scores came from; when given, its length must match.
        curve: Monthly loading curve (percent rates).
        scores: ``T x d`` component scores.
        l: Maturity in months.

    Raises:
        MaturityOutOfRange: If ``l`` is outside ``1..12·M_max``.
        InvalidRate: If a reconstructed rate is at or below -100%.
    """
    l = _check_maturity(curve, l)
    scores = _scores(scores, curve.d)
    if panel is not None and panel.T != scores.shape[0]:
        raise MisalignedSeries(f"{scores.shape[0]} score rows for a {panel.T}-month panel")
    rho = (curve.mean_curve[[l - 1, l]] + scores @ curve.gamma[:, [l - 1, l]]) / 100.0
    if np.any(rho <= -1.0):
        raise InvalidRate(f"reconstructed rate at or below -100% for maturity {l}")
    tau = l / MONTHS_PER_YEAR
    log_growth = np.log1p(rho)
    return -(tau - 1.0 / MONTHS_PER_YEAR) * log_growth[1:, 0] + tau * log_growth[:-1, 1]


def approx_returns(scores: np.ndarray, gamma: GammaMatrix, l: int) -> np.ndarray:
    """First-order returns ``Q*_l(t)``, ``t = 1..T-1``, as decimals.

    Affine in the scores: the carry term is the only part that does not
    scale with ``P``.
    """
    l = gamma.check_maturity(l)
    scores = _scores(scores, gamma.d)
    spread = scores[:-1] @ gamma.gamma[:, l] - scores[1:] @ gamma.gamma[:, l - 1]
    return (spread + gamma.carry[l]) / 100.0


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    maturity: int
    dates: Tuple[YearMonth, ...]
    exact: np.ndarray
    approx: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return self.exact - self.approx


def return_series(
    panel: RatePanel, curve: LoadingCurve, gamma: GammaMatrix, scores: np.ndarray, l: int
) -> ReturnSeries:
    """Exact and approximate returns dated by the month they are realised."""
    exact = exact_returns(panel, curve, scores, l)
    approx = approx_returns(scores, gamma, l)
    logger.info(
        "Returns l=%d: mean exact %.6f, mean approx %.6f, max |gap| %.2e",
        l, float(exact.mean()), float(approx.mean()), float(np.abs(exact - approx).max()),
    )
    return ReturnSeries(maturity=l, dates=panel.dates[1:], exact=exact, approx=approx)


def returns_oracle(
    model: ArSvModel, gamma: GammaMatrix, l: int, mode: str = "discrete", h: Optional[float] = None
) -> float:
    """Long-run mean of ``Q*_l`` per month, as a decimal.

    Raises:
        Unstable: If the model has no stationary mean in the chosen mode.
        UndefinedMoment: If that mean needs an infinite ``E[V]``.
    """
    l = gamma.check_maturity(l)
    if mode == "discrete":
        mean = stationary_mean_discrete(model)
    else:
        mean = stationary_mean_continuous(model, h)
    return float((gamma.diff[:, l] @ mean + gamma.carry[l]) / 100.0)


def returns_lln(
    model: ArSvModel,
    gamma: GammaMatrix,
    l: int,
    T: int = 1_000_000,
    reps: int = 8,
    seed: int = 0,
    mode: str = "discrete",
    h: Optional[float] = None,
    threads: Optional[int] = None,
    atol: float = DEFAULT_ATOL,
) -> LlnReport:
    """Time-averaged simulated ``Q*_l`` against its stationary limit.

    In continuous mode the return accrues as
    ``dQ = (Γ'_l·P + carry_l) dt - Γ_l·dP`` with ``Γ'`` the monthly backward
    difference, on an Euler grid of step ``h`` months.

    Raises:
        Unstable: If the model has no stationary mean.
        MaturityOutOfRange: If ``l`` is outside Γ's grid.
    """
    l = gamma.check_maturity(l)
    if gamma.d != model.d:
        raise MisalignedSeries(f"Γ has {gamma.d} rows for a d={model.d} model")
    if mode == "continuous" and (h is None or h <= 0.0):
        raise ConfigError("continuous mode needs a positive step h")
    if reps < 2:
        raise ConfigError("a Monte Carlo standard error needs at least 2 replications")
    oracle = np.array([returns_oracle(model, gamma, l, mode, h)])
    checkpoints = checkpoint_steps(T)
    level, previous = gamma.gamma[:, l], gamma.gamma[:, l - 1]
    slope, carry = gamma.diff[:, l], gamma.carry[l]

    def replicate(rep: int) -> ReplicationAverage:
        x = simulate_path(model, mode, T, seed, rep, h).x
        if mode == "discrete":
            q = (x[:-1] @ level - x[1:] @ previous + carry) / 100.0
            return running_average(q, checkpoints)
        assert h is not None
        dq = ((x[:-1] @ slope + carry) * h - np.diff(x, axis=0) @ level) / 100.0
        return running_average(dq, checkpoints, scale=1.0 / h)

    averages = run_replications(replicate, reps, threads)
    return summarize(
        averages,
        oracle,
        quantity=f"Q*_{l}",
        mode=mode,
        steps=T,
        seed=seed,
        checkpoints=checkpoints,
        atol=atol,
        h=h if mode == "continuous" else None,
        labels=[f"Q*_{l}"],
    )


def quadratic_loading_curve(max_month: int, coefficient: float = 1.0) -> LoadingCurve:
    """Two-factor curve with a flat level loading and ``γ₂(l) = coefficient·l/12``.

    The second component's ``Γ₂`` is then quadratic in maturity, which
    breaks the proportionality of term premia across maturities.
    """
    if max_month < 1:
        raise ValueError(f"max_month must be positive, got {max_month}")
    months = np.arange(max_month + 1)
    gamma = np.vstack([np.ones(max_month + 1), coefficient * months / MONTHS_PER_YEAR])
    return LoadingCurve(months=months, gamma=gamma, mean_curve=np.zeros(max_month + 1))
