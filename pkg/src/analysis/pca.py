"""Principal components of the rate panel and monthly loading curves."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from ..data.panel import RatePanel, YearMonth
from ..errors import IndexOutOfRange, RankDeficient, TooFewObservations
from .linalg import jacobi_eigh

logger = logging.getLogger(__name__)

# Eigenvalues below this fraction of the trace count as numerically zero.
SINGULAR_TOL = 1e-12
COMPONENT_NAMES = ("level", "slope", "curvature")


def component_name(index: int) -> str:
    """Label for 0-based component ``index``."""
    return COMPONENT_NAMES[index] if index < len(COMPONENT_NAMES) else f"pc{index + 1}"


@dataclass(frozen=True, eq=False)
class PcModel:
    """Covariance PCA of a rate panel truncated to ``d`` components."""

    dates: Tuple[YearMonth, ...]
    maturities: Tuple[int, ...]
    mean_rates: np.ndarray
    loadings: np.ndarray
    eigenvalues: np.ndarray
    variance_ratio: np.ndarray
    scores: np.ndarray

    @property
    def d(self) -> int:
        return self.loadings.shape[0]

    @property
    def T(self) -> int:
        return self.scores.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PcModel):
            return NotImplemented
        return (
            self.dates == other.dates
            and self.maturities == other.maturities
            and all(
                np.array_equal(getattr(self, name), getattr(other, name))
                for name in ("mean_rates", "loadings", "eigenvalues", "variance_ratio", "scores")
            )
        )

    __hash__ = None  # type: ignore[assignment]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "maturities": list(self.maturities),
            "components": [component_name(i) for i in range(self.d)],
            "variance_ratio": self.variance_ratio.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "mean_rates": self.mean_rates.tolist(),
            "loadings": self.loadings.tolist(),
            "range": [str(self.dates[0]), str(self.dates[-1])],
        }


def fit_pca(panel: RatePanel, d: int) -> PcModel:
    """Principal components of the centered rate panel.

    Loadings are eigenvectors of the sample covariance (``T - 1``
    denominator), ordered by descending eigenvalue, each row signed so its
    mean is nonnegative. Scores are ``loadings @ (rates(t) - mean_rates)``.

    Raises:
        ValueError: If ``d`` is outside ``1..M``.
        TooFewObservations: If ``T <= M``.
        RankDeficient: If the ``d``-th eigenvalue is numerically zero.
    """
    if not 1 <= d <= panel.M:
        raise ValueError(f"component count {d} outside 1..{panel.M}")
    if panel.T <= panel.M:
        raise TooFewObservations(f"PCA needs T > M, got T={panel.T} M={panel.M}")

    rates = panel.values
    mean_rates = rates.mean(axis=0)
    centered = rates - mean_rates
    covariance = centered.T @ centered / (panel.T - 1)
    values, vectors = jacobi_eigh(covariance)
    trace = float(np.trace(covariance))
    if trace <= 0.0 or values[d - 1] <= SINGULAR_TOL * trace:
        raise RankDeficient(
            f"covariance has fewer than {d} non-negligible eigenvalues"
        )

    loadings = vectors[:, :d].T.copy()
    for i in range(d):
        if loadings[i].mean() < 0.0:
            loadings[i] = -loadings[i]
    scores = centered @ loadings.T
    ratio = values[:d] / trace

    logger.info(
        "PCA d=%d variance ratios %s",
        d, ", ".join(f"{r:.4%}" for r in ratio),
    )
    return PcModel(
        dates=panel.dates,
        maturities=panel.maturities,
        mean_rates=mean_rates,
        loadings=loadings,
        eigenvalues=values,
        variance_ratio=ratio,
        scores=scores,
    )


def reconstruct_rates(model: PcModel, t: int) -> np.ndarray:
    """Rates at date index ``t`` rebuilt from the retained components."""
    if not 0 <= t < model.T:
        raise IndexOutOfRange(f"date index {t} outside 0..{model.T - 1}")
    return model.mean_rates + model.loadings.T @ model.scores[t]


def reconstruct_all(model: PcModel) -> np.ndarray:
    return model.mean_rates + model.scores @ model.loadings


@dataclass(frozen=True, eq=False)
class LoadingCurve:
    """Loadings and mean rate sampled on monthly maturities ``0..12·M_max``.

    ``gamma[i, l]`` is component ``i``'s loading at maturity ``l`` months and
    ``mean_curve[l]`` the interpolated mean rate (percent).
    """

    months: np.ndarray
    gamma: np.ndarray
    mean_curve: np.ndarray

    @property
    def d(self) -> int:
        return self.gamma.shape[0]

    @property
    def max_month(self) -> int:
        return int(self.months[-1])

    def rates(self, scores: np.ndarray) -> np.ndarray:
        """Reconstructed rates ``ρ_l(t)`` in percent for every score row."""
        scores = np.atleast_2d(np.asarray(scores, dtype=float))
        return self.mean_curve + scores @ self.gamma


def _interpolate(knots: np.ndarray, values: np.ndarray, months: np.ndarray) -> np.ndarray:
    curve = np.interp(months, knots, values)
    below = months < knots[0]
    if below.any():
        slope = (values[1] - values[0]) / (knots[1] - knots[0])
        curve[below] = values[0] + slope * (months[below] - knots[0])
    curve[knots.astype(int)] = values
    return curve


def interpolate_loadings(model: PcModel) -> LoadingCurve:
    """Piecewise-linear loading curves through the annual knots.

    Knots sit at ``12·k`` months for each panel maturity ``k`` and are hit
    exactly. Below the first knot the first segment is extended down to
    maturity 0.
    """
    knots = 12.0 * np.asarray(model.maturities, dtype=float)
    months = np.arange(int(knots[-1]) + 1)
    gamma = np.vstack([_interpolate(knots, row, months) for row in model.loadings])
    mean_curve = _interpolate(knots, model.mean_rates, months)
    return LoadingCurve(months=months, gamma=gamma, mean_curve=mean_curve)
