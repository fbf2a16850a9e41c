"""Term premia and the cross-maturity CAPM slope."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Sequence, Union

import numpy as np

from ..analysis.ols import ols
from ..errors import DegenerateSeries, MisalignedSeries

logger = logging.getLogger(__name__)

SeriesLike = Union[np.ndarray, Sequence[float]]

# Relative floor on the slope standard error; a noiseless fit has stderr at
# rounding level.
STDERR_FLOOR = 1e-10


def term_premium(returns_l: SeriesLike, returns_short: SeriesLike) -> np.ndarray:
    """Excess return of maturity ``l`` over the short benchmark."""
    long_leg = np.asarray(returns_l, dtype=float).ravel()
    short_leg = np.asarray(returns_short, dtype=float).ravel()
    if long_leg.shape != short_leg.shape:
        raise MisalignedSeries(
            f"return series lengths differ: {len(long_leg)} vs {len(short_leg)}"
        )
    return long_leg - short_leg


@dataclass(frozen=True)
class CapmResult:
    """No-intercept regression of one term premium on a benchmark premium.

    ``theoretical`` is the one-factor continuous-time ratio ``l/l0``.
    ``theoretical_discrete`` is ``(l-s)/(l0-s)`` for premia measured over
    the ``s``-month holding return: under a flat level loading the monthly
    holding-return algebra gives exactly that ratio. ``deviation_sigmas``
    is measured against ``target``, the discrete ratio when it is defined.
    """

    slope: float
    stderr: float
    l: int
    l0: int
    n_obs: int
    short: int = 1

    @property
    def theoretical(self) -> float:
        return self.l / self.l0

    @property
    def theoretical_discrete(self) -> float:
        if self.l0 == self.short:
            return math.nan
        return (self.l - self.short) / (self.l0 - self.short)

    @property
    def target(self) -> float:
        discrete = self.theoretical_discrete
        return self.theoretical if math.isnan(discrete) else discrete

    def deviation(self, target: float) -> float:
        """Distance of the slope from ``target`` in standard errors.

        The standard error is floored at ``STDERR_FLOOR·max(1, |target|)``.
        """
        floor = STDERR_FLOOR * max(1.0, abs(target))
        return abs(self.slope - target) / max(self.stderr, floor)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "slope": self.slope,
            "stderr": self.stderr,
            "l": self.l,
            "l0": self.l0,
            "short": self.short,
            "n_obs": self.n_obs,
            "theoretical": self.theoretical,
            "theoretical_discrete": self.theoretical_discrete,
            "target": self.target,
            "deviation_sigmas": self.deviation(self.target),
        }


def capm_slope(
    tp_l: SeriesLike, tp_benchmark: SeriesLike, l: int, l0: int, short: int = 1
) -> CapmResult:
    """Slope of ``tp_l`` on ``tp_benchmark`` through the origin.

    ``short`` is the maturity both premia are measured against.

    Raises:
        MisalignedSeries: If the series differ in length.
        DegenerateSeries: If the benchmark is identically zero.
    """
    y = np.asarray(tp_l, dtype=float).ravel()
    x = np.asarray(tp_benchmark, dtype=float).ravel()
    if len(x) != len(y):
        raise MisalignedSeries(f"term premium lengths differ: {len(y)} vs {len(x)}")
    if not np.any(x != 0.0):
        raise DegenerateSeries("benchmark term premium is identically zero")
    fit = ols(x[:, None], y, names=("slope",))
    result = CapmResult(
        slope=float(fit.coefficients[0]),
        stderr=float(fit.standard_errors[0]),
        l=int(l),
        l0=int(l0),
        n_obs=fit.n_obs,
        short=int(short),
    )
    logger.info(
        "CAPM l=%d on l0=%d: slope %.4f (se %.4f), one-factor value %.4f, %.2f se away",
        l, l0, result.slope, result.stderr, result.target, result.deviation(result.target),
    )
    return result
