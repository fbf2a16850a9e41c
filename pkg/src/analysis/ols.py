"""Ordinary least squares via pivoted QR.

Every regression in the package (VIX log-AR, scalar ARs, AR-SV rows, ADF
auxiliary regressions, CAPM slope) goes through ``ols``.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from ..errors import MisalignedSeries, RankDeficientDesign, TooFewObservations
from .special import student_t_two_sided

logger = logging.getLogger(__name__)

# Smallest accepted ratio between the trailing and leading diagonal of R.
RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OlsFit:
    """Coefficients and inference for one least-squares regression."""

    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    residuals: np.ndarray
    r_squared: float
    dof: int
    names: Tuple[str, ...] = ()

    @property
    def n_obs(self) -> int:
        return len(self.residuals)

    @property
    def rss(self) -> float:
        return float(self.residuals @ self.residuals)

    @property
    def sigma(self) -> float:
        """Residual standard deviation with the n - k correction."""
        return float(np.sqrt(self.rss / self.dof))

    def table(self) -> List[Dict[str, Any]]:
        names = self.names or tuple(f"x{j}" for j in range(len(self.coefficients)))
        return [
            {
                "regressor": name,
                "estimate": float(self.coefficients[j]),
                "stderr": float(self.standard_errors[j]),
                "t": float(self.t_stats[j]),
                "p": float(self.p_values[j]),
            }
            for j, name in enumerate(names)
        ]


def _has_intercept(x: np.ndarray) -> bool:
    for column in x.T:
        if column[0] != 0.0 and np.all(column == column[0]):
            return True
    return False


def ols(x: np.ndarray, y: np.ndarray, names: Optional[Sequence[str]] = None) -> OlsFit:
    """Least-squares fit of ``y`` on the columns of ``x``.

    Args:
        x: ``n x k`` design matrix (a 1-d array is one column).
        y: Length-``n`` response.
        names: Optional regressor labels for reports.

    Returns:
        OlsFit with two-sided Student-t p-values on ``n - k`` degrees of
        freedom.

    Raises:
        TooFewObservations: If ``n <= k``.
        RankDeficientDesign: If ``x`` is numerically rank deficient.
        MisalignedSeries: If ``x`` and ``y`` have different lengths.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float).ravel()
    n, k = x.shape
    if len(y) != n:
        raise MisalignedSeries(f"design has {n} rows, response has {len(y)}")
    if n <= k:
        raise TooFewObservations(f"{n} observations for {k} coefficients")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("regression inputs must be finite")

    q, r, pivot = scipy.linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag[0] == 0.0 or diag[-1] <= RANK_TOL * diag[0]:
        ratio = diag[-1] / diag[0] if diag[0] else 0.0
        raise RankDeficientDesign(f"design matrix is rank deficient (|r| ratio {ratio:.3g})")

    coefficients = np.empty(k)
    coefficients[pivot] = scipy.linalg.solve_triangular(r, q.T @ y)
    residuals = y - x @ coefficients
    dof = n - k
    rss = float(residuals @ residuals)
    r_inv = scipy.linalg.solve_triangular(r, np.eye(k))
    cov = np.empty((k, k))
    cov[np.ix_(pivot, pivot)] = (rss / dof) * (r_inv @ r_inv.T)
    standard_errors = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    t_stats = np.empty(k)
    p_values = np.empty(k)
    for j in range(k):
        if standard_errors[j] > 0.0:
            t_stats[j] = coefficients[j] / standard_errors[j]
        elif coefficients[j] != 0.0:
            t_stats[j] = np.copysign(np.inf, coefficients[j])
        else:
            t_stats[j] = 0.0
        p_values[j] = student_t_two_sided(float(t_stats[j]), dof)

    if _has_intercept(x):
        tss = float(np.sum((y - y.mean()) ** 2))
    else:
        tss = float(y @ y)
    if tss == 0.0:
        r_squared = 1.0 if rss == 0.0 else 0.0
    else:
        r_squared = 1.0 - rss / tss

    logger.debug("OLS n=%d k=%d rss=%.6g r2=%.6f", n, k, rss, r_squared)
    return OlsFit(
        coefficients=coefficients,
        standard_errors=standard_errors,
        t_stats=t_stats,
        p_values=p_values,
        residuals=residuals,
        r_squared=r_squared,
        dof=dof,
        names=tuple(names) if names is not None else (),
    )
