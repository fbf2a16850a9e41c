"""Monte Carlo checks of long-run time averages against closed forms.

Every check runs ``reps`` independent replications, each on its own RNG
stream, computes a per-replication time average, and compares the grand
mean with an oracle. The Monte Carlo standard error is the cross-replication
standard deviation of those averages over ``√reps``, which stays honest for
autocorrelated paths.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from ..analysis.estimate import ArSvModel
from ..errors import ConfigError, UndefinedMoment
from .simulate import (
    SimPath,
    euler_square_norm,
    simulate_continuous,
    simulate_discrete,
    stationary_mean_continuous,
    stationary_mean_discrete,
    vol_moment,
)

logger = logging.getLogger(__name__)

THREADS_ENV = "RATESVOL_THREADS"
PASS_SIGMAS = 4.0
DEFAULT_ATOL = 1e-8
CHECKPOINTS = 60
MODES = ("discrete", "continuous")

R = TypeVar("R")


@dataclass(frozen=True, eq=False)
class LlnReport:
    """Time-average estimate against its oracle.

    ``running_mean`` has one row per entry of ``checkpoints`` (step counts,
    log-spaced) holding the replication-averaged running time average.
    """

    quantity: str
    mode: str
    steps: int
    reps: int
    seed: int
    checkpoints: np.ndarray
    running_mean: np.ndarray
    estimate: np.ndarray
    oracle_mean: np.ndarray
    final_abs_error: np.ndarray
    mc_stderr: np.ndarray
    atol: float
    passed: bool
    h: Optional[float] = None
    labels: Tuple[str, ...] = ()
    square_norm_mean: Optional[float] = None
    square_norm_stderr: Optional[float] = None
    square_norm_oracle: Optional[float] = None

    @property
    def square_norm_passed(self) -> Optional[bool]:
        """Whether the ``|X|²`` average hit its oracle; ``None`` without one."""
        if self.square_norm_oracle is None or self.square_norm_mean is None:
            return None
        gap = abs(self.square_norm_mean - self.square_norm_oracle)
        return bool(gap < PASS_SIGMAS * (self.square_norm_stderr or 0.0) + self.atol)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "quantity": self.quantity,
            "mode": self.mode,
            "steps": self.steps,
            "reps": self.reps,
            "seed": self.seed,
            "h": self.h,
            "labels": list(self.labels),
            "estimate": self.estimate.tolist(),
            "oracle_mean": self.oracle_mean.tolist(),
            "final_abs_error": self.final_abs_error.tolist(),
            "mc_stderr": self.mc_stderr.tolist(),
            "atol": self.atol,
            "passed": self.passed,
        }
        if self.square_norm_mean is not None:
            data["square_norm"] = {
                "mean": self.square_norm_mean,
                "stderr": self.square_norm_stderr,
                "oracle": self.square_norm_oracle,
                "passed": self.square_norm_passed,
            }
        return data

    def running_rows(self) -> List[List[float]]:
        """``[steps, mean_1, ..., mean_k]`` rows for plotting."""
        return [
            [float(n), *map(float, row)] for n, row in zip(self.checkpoints, self.running_mean)
        ]


def resolve_threads(threads: Optional[int] = None, reps: Optional[int] = None) -> int:
    """Worker count: the configured value capped by ``RATESVOL_THREADS``."""
    count = threads if threads and threads > 0 else (os.cpu_count() or 1)
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if cap >= 1:
            count = min(count, cap)
    if reps is not None:
        count = min(count, reps)
    return max(1, count)


def run_replications(
    task: Callable[[int], R], reps: int, threads: Optional[int] = None
) -> List[R]:
    """Run ``task(rep)`` for every replication, results ordered by ``rep``."""
    workers = resolve_threads(threads, reps)
    logger.debug("Running %d replications on %d threads", reps, workers)
    if workers == 1:
        return [task(rep) for rep in range(reps)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, range(reps)))


def checkpoint_steps(steps: int, count: int = CHECKPOINTS) -> np.ndarray:
    """Distinct log-spaced step counts in ``1..steps``, ending at ``steps``."""
    grid = np.unique(np.geomspace(1, steps, num=min(count, steps)).round().astype(np.int64))
    if grid[-1] != steps:
        grid = np.append(grid, steps)
    return grid


@dataclass(frozen=True, eq=False)
class ReplicationAverage:
    """One replication's running and final time averages."""

    running: np.ndarray
    final: np.ndarray
    extra: Optional[float] = None


def running_average(values: np.ndarray, checkpoints: np.ndarray, scale: float = 1.0) -> ReplicationAverage:
    """Running means of the rows of ``values`` at each checkpoint, times ``scale``."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    cumulative = np.cumsum(values, axis=0)
    running = scale * cumulative[checkpoints - 1] / checkpoints[:, None]
    return ReplicationAverage(running=running, final=running[-1].copy())


def summarize(
    averages: Sequence[ReplicationAverage],
    oracle: np.ndarray,
    *,
    quantity: str,
    mode: str,
    steps: int,
    seed: int,
    checkpoints: np.ndarray,
    atol: float = DEFAULT_ATOL,
    h: Optional[float] = None,
    labels: Sequence[str] = (),
    square_oracle: Optional[float] = None,
) -> LlnReport:
    """Merge replication averages into an :class:`LlnReport`."""
    reps = len(averages)
    finals = np.vstack([avg.final for avg in averages])
    estimate = finals.mean(axis=0)
    stderr = finals.std(axis=0, ddof=1) / np.sqrt(reps)
    error = np.abs(estimate - oracle)
    passed = bool(np.all(error < PASS_SIGMAS * stderr + atol))
    running = np.mean(np.stack([avg.running for avg in averages]), axis=0)

    extras = [avg.extra for avg in averages if avg.extra is not None]
    square_mean = square_err = None
    if len(extras) == reps:
        square_mean = float(np.mean(extras))
        square_err = float(np.std(extras, ddof=1) / np.sqrt(reps))

    logger.info(
        "LLN %s (%s, %d steps x %d reps): max |error| %.3g, max stderr %.3g, %s",
        quantity, mode, steps, reps, float(error.max()), float(stderr.max()),
        "passed" if passed else "FAILED",
    )
    return LlnReport(
        quantity=quantity,
        mode=mode,
        steps=steps,
        reps=reps,
        seed=seed,
        checkpoints=checkpoints,
        running_mean=running,
        estimate=estimate,
        oracle_mean=np.asarray(oracle, dtype=float),
        final_abs_error=error,
        mc_stderr=stderr,
        atol=atol,
        passed=passed,
        h=h,
        labels=tuple(labels),
        square_norm_mean=square_mean,
        square_norm_stderr=square_err,
        square_norm_oracle=square_oracle if square_mean is not None else None,
    )


def _check_run(mode: str, steps: int, reps: int, h: Optional[float]) -> None:
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    if steps < 1:
        raise ConfigError(f"steps must be at least 1, got {steps}")
    if reps < 2:
        raise ConfigError("a Monte Carlo standard error needs at least 2 replications")
    if mode == "continuous" and (h is None or h <= 0.0):
        raise ConfigError("continuous mode needs a positive step h")


def simulate_path(
    model: ArSvModel, mode: str, steps: int, seed: int, replication: int, h: Optional[float]
) -> SimPath:
    """``steps`` transitions of either model; continuous paths span ``steps·h``."""
    if mode == "discrete":
        return simulate_discrete(model, steps, seed, replication=replication)
    assert h is not None
    return simulate_continuous(model, steps * h, h, seed, replication=replication)


def verify_lln(
    model: ArSvModel,
    mode: str = "discrete",
    T: int = 1_000_000,
    reps: int = 8,
    seed: int = 0,
    h: Optional[float] = None,
    threads: Optional[int] = None,
    atol: float = DEFAULT_ATOL,
) -> LlnReport:
    """Compare the time-averaged factor path with its stationary mean.

    Discrete mode averages ``X(1..T)``. Continuous mode averages ``X`` over
    ``[0, T·h)`` as a left Riemann sum and also checks the time average of
    ``|X|²`` against :func:`euler_square_norm` when that has a closed form.

    Args:
        model: Model to simulate.
        mode: ``"discrete"`` or ``"continuous"``.
        T: Steps per replication.
        reps: Independent replications (at least 2).
        seed: Run seed; replication ``r`` uses stream ``(seed, r)``.
        h: Continuous-time step.
        threads: Worker cap, further capped by ``RATESVOL_THREADS``.
        atol: Absolute slack added to the pass band.

    Raises:
        Unstable: If the model has no stationary mean in the chosen mode.
        UndefinedMoment: If the mean needs an infinite ``E[V]``.
        NonFiniteState: If a replication overflows.
    """
    _check_run(mode, T, reps, h)
    square_oracle: Optional[float] = None
    if mode == "discrete":
        oracle = stationary_mean_discrete(model)
    else:
        assert h is not None
        oracle = stationary_mean_continuous(model, h)
        square_oracle = euler_square_norm(model, h)
    checkpoints = checkpoint_steps(T)

    def replicate(rep: int) -> ReplicationAverage:
        path = simulate_path(model, mode, T, seed, rep, h)
        logger.debug("Replication %d finished", rep)
        if mode == "discrete":
            return running_average(path.x[1:], checkpoints)
        states = path.x[:-1]
        average = running_average(states, checkpoints)
        square = float(np.mean(np.sum(states * states, axis=1)))
        return ReplicationAverage(average.running, average.final, square)

    averages = run_replications(replicate, reps, threads)
    return summarize(
        averages,
        oracle,
        quantity="X",
        mode=mode,
        steps=T,
        seed=seed,
        checkpoints=checkpoints,
        atol=atol,
        h=h if mode == "continuous" else None,
        labels=[f"x{i + 1}" for i in range(model.d)],
        square_oracle=square_oracle,
    )


def verify_vol_moments(
    model: ArSvModel,
    mode: str = "discrete",
    T: int = 1_000_000,
    reps: int = 8,
    seed: int = 0,
    powers: Sequence[float] = (-2.0, -1.0, 1.0, 2.0),
    h: Optional[float] = None,
    threads: Optional[int] = None,
    atol: float = DEFAULT_ATOL,
) -> LlnReport:
    """Time averages of ``V^u`` against the stationary moments.

    Gaussian innovations give ``exp(u·μ∞ + ½·σ∞²·u²)``; see :func:`vol_moment`
    for the other laws.

    Raises:
        Unstable: If ``ln V`` is not mean reverting in the chosen mode.
        UndefinedMoment: If one of the requested moments is infinite.
    """
    _check_run(mode, T, reps, h)
    powers = tuple(float(u) for u in powers)
    oracle = np.array([vol_moment(model, u, mode, h) for u in powers])
    if not np.all(np.isfinite(oracle)):
        missing = [u for u, value in zip(powers, oracle) if not np.isfinite(value)]
        raise UndefinedMoment(f"E[V^u] is infinite for u in {missing} ({model.innovation})")
    checkpoints = checkpoint_steps(T)
    exponents = np.array(powers)

    def replicate(rep: int) -> ReplicationAverage:
        path = simulate_path(model, mode, T, seed, rep, h)
        v = path.v[1:] if mode == "discrete" else path.v[:-1]
        return running_average(np.power.outer(v, exponents), checkpoints)

    averages = run_replications(replicate, reps, threads)
    return summarize(
        averages,
        oracle,
        quantity="V^u",
        mode=mode,
        steps=T,
        seed=seed,
        checkpoints=checkpoints,
        atol=atol,
        h=h if mode == "continuous" else None,
        labels=[f"u={u:g}" for u in powers],
    )
