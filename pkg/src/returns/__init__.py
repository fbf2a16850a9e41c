"""Bond returns, duration-weighted loadings and term premia."""

from .bonds import (
    GammaMatrix,
    ReturnSeries,
    approx_returns,
    exact_returns,
    gamma_matrix,
    price_zero,
    quadratic_loading_curve,
    return_series,
    returns_lln,
    returns_oracle,
)
from .premia import CapmResult, capm_slope, term_premium

__all__ = [
    "CapmResult",
    "GammaMatrix",
    "ReturnSeries",
    "approx_returns",
    "capm_slope",
    "exact_returns",
    "gamma_matrix",
    "price_zero",
    "quadratic_loading_curve",
    "return_series",
    "returns_lln",
    "returns_oracle",
    "term_premium",
]
