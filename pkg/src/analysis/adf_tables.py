"""Response-surface coefficients for Dickey-Fuller p-values.

MacKinnon (1994) approximation for the t-statistic with a constant and one
unit root (the "c" case). Below ``TAU_STAR`` the p-value is
``Φ(Σ SMALL_P[i]·τ^i)``, above it ``Φ(Σ LARGE_P[i]·τ^i)``; outside
``[TAU_MIN, TAU_MAX]`` it is clamped to 0 or 1.
"""

TAU_MIN = -18.83
TAU_MAX = 2.74
TAU_STAR = -1.61

# Polynomial coefficients, lowest power first, already scaled.
SMALL_P = (2.1659, 1.4412, 3.8269e-2)
LARGE_P = (1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2)
