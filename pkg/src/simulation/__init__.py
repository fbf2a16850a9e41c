"""Path simulation and long-run average checks."""

from .lln import LlnReport, verify_lln, verify_vol_moments
from .simulate import (
    SimPath,
    euler_square_norm,
    log_vol_moments,
    simulate_continuous,
    simulate_discrete,
    stationary_mean_continuous,
    stationary_mean_discrete,
    vol_moment,
)

__all__ = [
    "LlnReport",
    "SimPath",
    "euler_square_norm",
    "log_vol_moments",
    "simulate_continuous",
    "simulate_discrete",
    "stationary_mean_continuous",
    "stationary_mean_discrete",
    "verify_lln",
    "verify_vol_moments",
    "vol_moment",
]
