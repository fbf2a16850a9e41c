"""Random streams and innovation draws.

Each replication gets its own counter-based Philox stream derived from
``(seed, replication)``, so paths are reproducible and independent of how
replications are scheduled across threads.
"""

from typing import Tuple

import numpy as np

from ..analysis.estimate import INNOVATION_LAWS, ArSvModel


def replication_rng(seed: int, replication: int = 0) -> np.random.Generator:
    """Generator for replication ``replication`` of a run seeded with ``seed``."""
    if seed < 0 or replication < 0:
        raise ValueError("seed and replication must be non-negative")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(replication,))
    return np.random.Generator(np.random.Philox(sequence))


def standardized_draws(
    rng: np.random.Generator, law: str, size: Tuple[int, int], df: float = 0.0
) -> np.ndarray:
    """IID draws with mean 0 and variance 1 from the named law."""
    if law == "gaussian":
        return rng.standard_normal(size)
    if law == "laplace":
        return rng.laplace(0.0, 1.0 / np.sqrt(2.0), size)
    if law == "student_t":
        if df <= 2.0:
            raise ValueError("student_t innovations need df > 2")
        return rng.standard_t(df, size) * np.sqrt((df - 2.0) / df)
    raise ValueError(f"unknown innovation law {law!r}; expected one of {INNOVATION_LAWS}")


def covariance_factor(cov: np.ndarray) -> np.ndarray:
    """Matrix ``L`` with ``L Lᵀ = cov``; tolerates singular covariances."""
    cov = np.asarray(cov, dtype=float)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        values, vectors = np.linalg.eigh(0.5 * (cov + cov.T))
        return vectors * np.sqrt(np.clip(values, 0.0, None))


def innovations(model: ArSvModel, rng: np.random.Generator, steps: int) -> np.ndarray:
    """``steps x (d+1)`` correlated innovations ``(Z0, Z_1..Z_d)``."""
    factor = covariance_factor(model.covariance)
    draws = standardized_draws(rng, model.innovation, (steps, model.d + 1), model.innovation_df)
    return draws @ factor.T
