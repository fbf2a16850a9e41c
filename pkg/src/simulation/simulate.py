"""Path generation for the discrete and continuous-time AR-SV models.

Discrete paths iterate the monthly recursions exactly. Continuous paths
advance ``ln V`` with its exact Gaussian transition and ``X`` with
Euler-Maruyama, so the only discretisation error sits in ``X``. Both are
linear recursions once the innovations are drawn, which ``lfilter`` runs
without a Python loop whenever ``B`` is well-conditioned for
diagonalisation.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd
import scipy.linalg
from scipy.signal import lfilter

from ..analysis.estimate import ArSvModel, check_continuous, check_stability
from ..analysis.linalg import spectral_radius
from ..errors import ConfigError, NonFiniteState, StepTooLarge, UndefinedMoment, Unstable
from .rng import covariance_factor, innovations, replication_rng

logger = logging.getLogger(__name__)

MAX_STATE_NORM = 1e12
MAX_EULER_STEPS = 10**9
MAX_STEP_RADIUS = 0.5
# Eigenvector bases worse than this fall back to the explicit loop.
MAX_BASIS_COND = 1e8
# Moving-average weights of ln V below this are dropped from MGF sums.
MGF_WEIGHT_TOL = 1e-9
MAX_MGF_TERMS = 10**6

InitState = Tuple[float, np.ndarray]


@dataclass(frozen=True, eq=False)
class SimPath:
    """Jointly simulated volatility and factor trajectory, including ``t=0``."""

    times: np.ndarray
    v: np.ndarray
    x: np.ndarray
    seed: int
    replication: int = 0
    mode: str = "discrete"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimPath):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.replication == other.replication
            and self.mode == other.mode
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.v, other.v)
            and np.array_equal(self.x, other.x)
        )

    __hash__ = None  # type: ignore[assignment]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.x, columns=[f"x{i + 1}" for i in range(self.x.shape[1])])
        frame.insert(0, "v", self.v)
        frame.insert(0, "time", self.times)
        return frame


def log_vol_moments(model: ArSvModel, mode: Optional[str] = None) -> Tuple[float, float]:
    """Stationary mean and variance of ``ln V``.

    Raises:
        Unstable: If the log-volatility recursion is not mean reverting.
    """
    mode = mode or model.dynamics
    s2 = float(model.covariance[0, 0])
    if mode == "discrete":
        if not 0.0 < model.beta < 1.0:
            raise Unstable(f"beta={model.beta} outside (0, 1)")
        return model.alpha / (1.0 - model.beta), s2 / (1.0 - model.beta**2)
    if model.beta <= 0.0:
        raise Unstable(f"beta={model.beta} must be positive in continuous time")
    return model.alpha / model.beta, s2 / (2.0 * model.beta)


def ou_transition(beta: float, h: float) -> Tuple[float, float]:
    """Decay ``e^{-βh}`` and shock scale of the exact OU step of length ``h``."""
    if beta == 0.0:
        return 1.0, float(np.sqrt(h))
    decay = float(np.exp(-beta * h))
    return decay, float(np.sqrt((1.0 - np.exp(-2.0 * beta * h)) / (2.0 * beta)))


def _log_mgf(law: str, t: np.ndarray) -> np.ndarray:
    """Log moment generating function of a unit-variance draw from ``law``."""
    t = np.asarray(t, dtype=float)
    if law == "gaussian":
        return 0.5 * t * t
    if law == "laplace":
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(t * t < 2.0, -np.log1p(-0.5 * t * t), np.inf)
    return np.where(t == 0.0, 0.0, np.inf)


def _log_mgf_slope(law: str, t: np.ndarray) -> np.ndarray:
    """Derivative of :func:`_log_mgf`, i.e. ``E[ε e^{tε}] / E[e^{tε}]``."""
    t = np.asarray(t, dtype=float)
    if law == "gaussian":
        return t
    if law == "laplace":
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(t * t < 2.0, t / (1.0 - 0.5 * t * t), np.nan)
    return np.where(t == 0.0, 0.0, np.nan)


def _log_vol_mgf(model: ArSvModel, u: float, decay: float, scale: float) -> float:
    """``log E[exp(u·(ln V - μ∞))]`` summed over the moving-average weights."""
    loadings = covariance_factor(model.covariance)[0]
    lead = abs(u) * scale * float(np.max(np.abs(loadings)))
    if lead == 0.0:
        return 0.0
    if decay <= 0.0 or lead <= MGF_WEIGHT_TOL:
        terms = 1
    else:
        terms = int(np.ceil(np.log(MGF_WEIGHT_TOL / lead) / np.log(decay))) + 1
        terms = min(max(terms, 1), MAX_MGF_TERMS)
    weights = u * scale * decay ** np.arange(terms)
    return float(np.sum(_log_mgf(model.innovation, np.outer(weights, loadings))))


def vol_moment(
    model: ArSvModel, u: float, mode: Optional[str] = None, h: Optional[float] = None
) -> float:
    """Stationary ``E[V^u]`` under the model's innovation law.

    Gaussian draws give ``exp(u·μ∞ + ½·σ∞²·u²)``. Other laws sum the log
    moment generating function over the moving-average weights of ``ln V``;
    in continuous mode those weights come from the exact transition on a
    grid of step ``h``, and without ``h`` the Gaussian limit of a fine grid
    is used. Student-t draws have no exponential moments, so every
    ``u ≠ 0`` gives ``inf``.

    Raises:
        Unstable: If ``ln V`` is not mean reverting in the chosen mode.
    """
    mode = mode or model.dynamics
    mu, var = log_vol_moments(model, mode)
    if u == 0.0:
        return 1.0
    if model.innovation == "gaussian" or (mode == "continuous" and h is None):
        return float(np.exp(u * mu + 0.5 * var * u * u))
    if mode == "discrete":
        decay, scale = model.beta, 1.0
    else:
        assert h is not None
        decay, scale = ou_transition(model.beta, h)
    with np.errstate(over="ignore"):
        return float(np.exp(u * mu + _log_vol_mgf(model, u, decay, scale)))


def _finite_vol_mean(model: ArSvModel, mode: str, h: Optional[float]) -> float:
    m1 = vol_moment(model, 1.0, mode, h)
    if not np.isfinite(m1):
        raise UndefinedMoment(f"E[V] is infinite under {model.innovation} innovations")
    return m1


def _scaled_noise_tilt(model: ArSvModel) -> np.ndarray:
    """``E[V(t)·Z_i(t)] / E[V]`` on volatility-scaled rows, 0 elsewhere."""
    if model.innovation == "gaussian":
        tilt = model.covariance[0, 1:]
    else:
        factor = covariance_factor(model.covariance)
        tilt = factor[1:] @ _log_mgf_slope(model.innovation, factor[0])
    return np.where(model.scaled_mask, tilt, 0.0)


def stationary_mean_discrete(model: ArSvModel) -> np.ndarray:
    """Long-run mean of ``X`` for the discrete model.

    Solves ``(I - B) m = a + c·E[V] + κ`` where ``κ_i = E[V(t)·Z_i(t)]`` on
    volatility-scaled components and 0 elsewhere. ``V(t)`` shares the draw
    of ``Z_i(t)``, so ``κ_i = E[V]·Σ_{0i}`` for Gaussian innovations and
    the law's exponential tilt otherwise.

    Raises:
        Unstable: If the model fails the stability check.
        UndefinedMoment: If ``E[V]`` enters the mean and is infinite.
    """
    report = check_stability(model)
    if not report.stationary_ok:
        raise Unstable(
            f"spectral radius {report.spectral_radius_B:.6g}, beta {model.beta:.6g}"
        )
    drift = np.array(model.a, dtype=float)
    if np.any(model.c != 0.0) or model.scaled_mask.any():
        m1 = _finite_vol_mean(model, "discrete", None)
        drift = drift + m1 * (model.c + _scaled_noise_tilt(model))
    return np.linalg.solve(np.eye(model.d) - model.B, drift)


def stationary_mean_continuous(model: ArSvModel, h: Optional[float] = None) -> np.ndarray:
    """Long-run mean ``B⁻¹(a + c·E[V])`` of the continuous-time model.

    ``h`` is the grid step the volatility is sampled on; see :func:`vol_moment`.

    Raises:
        Unstable: Unless every eigenvalue of ``B`` has positive real part and
            ``β > 0``.
        UndefinedMoment: If ``c ≠ 0`` and ``E[V]`` is infinite.
    """
    report = check_continuous(model)
    if not report.ok:
        raise Unstable(
            f"min Re(eig B)={report.min_real_part:.6g}, beta={model.beta:.6g}"
        )
    drift = np.array(model.a, dtype=float)
    if np.any(model.c != 0.0):
        drift = drift + model.c * _finite_vol_mean(model, "continuous", h)
    return np.linalg.solve(model.B, drift)


def euler_square_norm(model: ArSvModel, h: float) -> Optional[float]:
    """Stationary ``E|X|²`` of the Euler chain with step ``h``.

    With ``c = 0`` the chain is ``X' = A X + h·a + √h·ξ(V)·Z`` with
    ``A = I - hB`` and ``ξ(V)`` independent of the step's draw, so the
    covariance solves ``S = A S Aᵀ + h·Q`` with ``Q_ij = Σ_ij·E[V^(s_i+s_j)]``
    and ``s`` marking scaled rows. Returns ``None`` when ``c ≠ 0`` (``X`` then
    inherits the autocovariance of ``V``), when ``A`` is not contracting or
    when a needed moment is infinite.
    """
    if np.any(model.c != 0.0):
        return None
    transition = np.eye(model.d) - h * model.B
    if spectral_radius(transition) >= 1.0:
        return None
    mean = stationary_mean_continuous(model, h)
    marks = model.scaled_mask.astype(int)
    powers = marks[:, None] + marks[None, :]
    moments = {int(p): vol_moment(model, float(p), "continuous", h) for p in np.unique(powers)}
    if not all(np.isfinite(value) for value in moments.values()):
        return None
    weights = np.vectorize(moments.__getitem__, otypes=[float])(powers)
    drive = h * model.covariance[1:, 1:] * weights
    covariance = scipy.linalg.solve_discrete_lyapunov(transition, drive)
    return float(mean @ mean + np.trace(covariance))


def _linear_recursion(transition: np.ndarray, forcing: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """Rows ``x(0..n)`` of ``x(k) = A x(k-1) + u(k)``."""
    n, d = forcing.shape
    out = np.empty((n + 1, d))
    out[0] = x0
    if d == 1:
        pole = transition[0, 0]
        out[1:, 0] = lfilter([1.0], [1.0, -pole], forcing[:, 0], zi=[pole * x0[0]])[0]
        return out

    poles, basis = np.linalg.eig(transition)
    if np.all(np.isfinite(basis)) and np.linalg.cond(basis) < MAX_BASIS_COND:
        inverse = np.linalg.inv(basis)
        modal = forcing @ inverse.T
        start = inverse @ x0
        decoupled = np.empty((n, d), dtype=complex)
        for j in range(d):
            decoupled[:, j] = lfilter(
                [1.0], [1.0, -poles[j]], modal[:, j], zi=[poles[j] * start[j]]
            )[0]
        out[1:] = (decoupled @ basis.T).real
        return out

    logger.debug("Transition matrix not diagonalisable; using explicit loop")
    state = np.array(x0, dtype=float)
    for k in range(n):
        state = transition @ state + forcing[k]
        out[k + 1] = state
    return out


def _guard(v: np.ndarray, x: np.ndarray) -> None:
    with np.errstate(invalid="ignore", over="ignore"):
        bad = ~np.isfinite(v) | (v > MAX_STATE_NORM)
        bad |= ~np.all(np.isfinite(x), axis=1)
        bad |= np.sqrt(np.sum(x * x, axis=1)) > MAX_STATE_NORM
    if bad.any():
        raise NonFiniteState(int(np.argmax(bad)))


def _start_mean(model: ArSvModel, mode: str, log_v0: float) -> np.ndarray:
    """Stationary mean of ``X``; the mean at ``V = V(0)`` when ``E[V]`` is infinite."""
    try:
        if mode == "discrete":
            return stationary_mean_discrete(model)
        return stationary_mean_continuous(model)
    except UndefinedMoment:
        logger.debug("E[V] is infinite; starting X at the mean for V = %.4g", np.exp(log_v0))
        drift = model.a + model.c * np.exp(log_v0)
        if mode == "discrete":
            return np.linalg.solve(np.eye(model.d) - model.B, drift)
        return np.linalg.solve(model.B, drift)


def _initial_state(
    model: ArSvModel, init: Optional[InitState], mode: str
) -> Tuple[float, np.ndarray]:
    if init is not None:
        v0, x0 = init
        x0 = np.asarray(x0, dtype=float).reshape(model.d)
        if not v0 > 0.0:
            raise ValueError(f"initial volatility must be positive, got {v0}")
        return float(np.log(v0)), x0
    if mode == "discrete":
        log_v0 = model.alpha / (1.0 - model.beta) if model.beta != 1.0 else 0.0
        stable = check_stability(model).stationary_ok
    else:
        log_v0 = model.alpha / model.beta if model.beta != 0.0 else 0.0
        stable = check_continuous(model).ok
    x0 = _start_mean(model, mode, log_v0) if stable else np.zeros(model.d)
    return log_v0, x0


def simulate_discrete(
    model: ArSvModel,
    T: int,
    seed: int,
    init: Optional[InitState] = None,
    replication: int = 0,
) -> SimPath:
    """Simulate ``T`` monthly steps of the discrete model.

    Args:
        model: Model parameters.
        T: Number of steps; the path has ``T + 1`` rows including ``t=0``.
        seed: Run seed.
        init: Optional ``(V(0), X(0))``; defaults to ``ln V(0) = α/(1-β)`` and
            the stationary mean of ``X`` when the model is stable.
        replication: Stream index within the run.

    Raises:
        NonFiniteState: If the state overflows, with the first bad step.
    """
    if T < 1:
        raise ConfigError(f"T must be at least 1, got {T}")
    log_v0, x0 = _initial_state(model, init, "discrete")
    shocks = innovations(model, replication_rng(seed, replication), T)

    with np.errstate(over="ignore", invalid="ignore"):
        log_v = np.empty(T + 1)
        log_v[0] = log_v0
        log_v[1:] = lfilter(
            [1.0], [1.0, -model.beta], model.alpha + shocks[:, 0], zi=[model.beta * log_v0]
        )[0]
        v = np.exp(log_v)
        scale = np.where(model.scaled_mask, v[1:, None], 1.0)
        forcing = model.a + np.outer(v[1:], model.c) + scale * shocks[:, 1:]
        if not np.all(np.isfinite(forcing)):
            bad = ~np.all(np.isfinite(forcing), axis=1)
            raise NonFiniteState(int(np.argmax(bad)) + 1)
        x = _linear_recursion(model.B, forcing, x0)
    _guard(v, x)
    return SimPath(
        times=np.arange(T + 1, dtype=float),
        v=v,
        x=x,
        seed=seed,
        replication=replication,
        mode="discrete",
    )


def simulate_continuous(
    model: ArSvModel,
    horizon: float,
    h: float,
    seed: int,
    init: Optional[InitState] = None,
    replication: int = 0,
) -> SimPath:
    """Simulate the continuous-time model on a grid of step ``h``.

    ``ln V`` follows its exact Ornstein-Uhlenbeck transition; ``X`` takes
    Euler-Maruyama steps with drift ``a - B X + c V`` and diffusion
    ``ξ(V)·√h·Z`` evaluated at the start of each step. The innovation
    covariance is read per unit of time.

    Raises:
        StepTooLarge: If ``h·ρ(B) > 0.5``.
        NonFiniteState: If the state overflows.
    """
    if h <= 0.0 or horizon <= 0.0:
        raise ConfigError("horizon and h must be positive")
    if horizon / h > MAX_EULER_STEPS:
        raise ConfigError(f"horizon/h exceeds {MAX_EULER_STEPS} steps")
    steps = int(round(horizon / h))
    if steps < 1:
        raise ConfigError("horizon shorter than one step")
    radius = spectral_radius(model.B)
    if h * radius > MAX_STEP_RADIUS:
        raise StepTooLarge(f"h*spectral_radius(B) = {h * radius:.4g} > {MAX_STEP_RADIUS}")

    log_v0, x0 = _initial_state(model, init, "continuous")
    shocks = innovations(model, replication_rng(seed, replication), steps)

    decay, spread = ou_transition(model.beta, h)
    shift = model.alpha * h if model.beta == 0.0 else (model.alpha / model.beta) * (1.0 - decay)

    with np.errstate(over="ignore", invalid="ignore"):
        log_v = np.empty(steps + 1)
        log_v[0] = log_v0
        log_v[1:] = lfilter(
            [1.0], [1.0, -decay], shift + spread * shocks[:, 0], zi=[decay * log_v0]
        )[0]
        v = np.exp(log_v)
        v_start = v[:-1]
        scale = np.where(model.scaled_mask, v_start[:, None], 1.0)
        forcing = h * (model.a + np.outer(v_start, model.c)) + scale * np.sqrt(h) * shocks[:, 1:]
        if not np.all(np.isfinite(forcing)):
            bad = ~np.all(np.isfinite(forcing), axis=1)
            raise NonFiniteState(int(np.argmax(bad)))
        x = _linear_recursion(np.eye(model.d) - h * model.B, forcing, x0)
    _guard(v, x)
    return SimPath(
        times=np.arange(steps + 1, dtype=float) * h,
        v=v,
        x=x,
        seed=seed,
        replication=replication,
        mode="continuous",
    )
