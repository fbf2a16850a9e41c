"""Small dense eigenproblems and matrix norms.

The matrices here are at most a dozen rows (rate maturities, factor count),
so the routines favour plain, predictable iterations over LAPACK calls:
cyclic Jacobi rotations for symmetric problems and Hessenberg reduction
followed by shifted QR sweeps for general ones.
"""

import logging
from typing import Tuple

import numpy as np

from ..errors import NoConvergence

logger = logging.getLogger(__name__)

_EPS = float(np.finfo(float).eps)


def jacobi_eigh(
    a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100
) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the Frobenius norm of the off-diagonal part drops
    below ``tol`` times the absolute trace (or the Frobenius norm when the
    trace vanishes).

    Args:
        a: Symmetric ``n x n`` matrix.
        tol: Relative off-diagonal tolerance.
        max_sweeps: Sweep limit before giving up.

    Returns:
        ``(eigenvalues, eigenvectors)`` with eigenvalues in descending order
        and eigenvectors as matching columns.

    Raises:
        ValueError: If ``a`` is not square and symmetric.
        NoConvergence: If ``max_sweeps`` sweeps do not reach ``tol``.
    """
    work = np.array(a, dtype=float)
    if work.ndim != 2 or work.shape[0] != work.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {work.shape}")
    n = work.shape[0]
    if not np.allclose(work, work.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(work).max(initial=0.0))):
        raise ValueError("matrix is not symmetric")
    work = 0.5 * (work + work.T)
    vectors = np.eye(n)

    scale = abs(np.trace(work)) or np.linalg.norm(work)
    if scale == 0.0:
        return np.zeros(n), vectors

    for sweep in range(max_sweeps + 1):
        off = np.sqrt(2.0 * np.sum(np.triu(work, 1) ** 2))
        if off < tol * scale:
            logger.debug("Jacobi converged after %d sweeps (n=%d)", sweep, n)
            break
        if sweep == max_sweeps:
            raise NoConvergence(
                f"Jacobi eigensolve did not converge in {max_sweeps} sweeps"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                theta = (work[q, q] - work[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    sign = 1.0 if theta >= 0.0 else -1.0
                    t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = work[:, p].copy(), work[:, q].copy()
                work[:, p] = c * col_p - s * col_q
                work[:, q] = s * col_p + c * col_q
                row_p, row_q = work[p, :].copy(), work[q, :].copy()
                work[p, :] = c * row_p - s * row_q
                work[q, :] = s * row_p + c * row_q
                work[p, q] = work[q, p] = 0.0

                vec_p, vec_q = vectors[:, p].copy(), vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q

    values = np.diag(work).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def hessenberg(a: np.ndarray) -> np.ndarray:
    """Upper Hessenberg form of ``a`` by Householder similarity transforms."""
    h = np.array(a, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1 :, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        u = x
        u[0] += alpha if x[0] >= 0.0 else -alpha
        norm_u = np.linalg.norm(u)
        if norm_u == 0.0:
            continue
        u /= norm_u
        h[k + 1 :, :] -= 2.0 * np.outer(u, u @ h[k + 1 :, :])
        h[:, k + 1 :] -= 2.0 * np.outer(h[:, k + 1 :] @ u, u)
        h[k + 2 :, k] = 0.0
    return h


def _wilkinson_shift(block: np.ndarray) -> complex:
    """Eigenvalue of the trailing 2x2 block closest to its last diagonal entry."""
    a, b = block[-2, -2], block[-2, -1]
    c, d = block[-1, -2], block[-1, -1]
    half_trace = 0.5 * (a + d)
    disc = np.sqrt(complex(half_trace * half_trace - (a * d - b * c)))
    first, second = half_trace + disc, half_trace - disc
    return first if abs(first - d) <= abs(second - d) else second


def eigenvalues(a: np.ndarray, max_iter: int = 0) -> np.ndarray:
    """All eigenvalues of a general real matrix.

    Reduces to Hessenberg form, then runs complex-shifted QR sweeps on the
    active block with deflation at working precision.

    Args:
        a: Square matrix with finite entries.
        max_iter: Iteration cap; ``0`` means ``100 * n**2``.

    Returns:
        Complex eigenvalues sorted by descending modulus. Imaginary parts
        below ``1e-10`` of the modulus are set to zero.

    Raises:
        NoConvergence: If the iteration cap is reached.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    n = a.shape[0]
    limit = max_iter or 100 * n * n
    h = hessenberg(a).astype(complex)
    found = []
    hi = n - 1
    iterations = 0
    since_deflation = 0

    def negligible(k: int) -> bool:
        scale = abs(h[k, k]) + abs(h[k - 1, k - 1])
        if scale == 0.0:
            scale = np.abs(h).max()
        return abs(h[k, k - 1]) <= _EPS * scale

    while hi >= 0:
        if hi == 0:
            found.append(h[0, 0])
            break
        if negligible(hi):
            h[hi, hi - 1] = 0.0
            found.append(h[hi, hi])
            hi -= 1
            since_deflation = 0
            continue
        lo = hi - 1
        while lo > 0 and not negligible(lo):
            lo -= 1
        if lo > 0:
            h[lo, lo - 1] = 0.0

        block = h[lo : hi + 1, lo : hi + 1]
        if since_deflation and since_deflation % 10 == 0:
            shift = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            shift = _wilkinson_shift(block)
        eye = np.eye(hi - lo + 1)
        q, r = np.linalg.qr(block - shift * eye)
        h[lo : hi + 1, lo : hi + 1] = r @ q + shift * eye

        iterations += 1
        since_deflation += 1
        if iterations >= limit:
            raise NoConvergence(f"QR iteration did not converge in {limit} steps")

    logger.debug("QR eigenvalues: n=%d, %d iterations", n, iterations)
    values = np.array(found, dtype=complex)
    tiny = np.abs(values.imag) <= 1e-10 * np.maximum(np.abs(values), 1e-300)
    values.imag[tiny] = 0.0
    order = np.lexsort((-values.imag, -values.real, -np.abs(values)))
    return values[order]


def spectral_radius(b: np.ndarray) -> float:
    """Largest eigenvalue modulus of ``b``."""
    return float(np.abs(eigenvalues(b)).max())


def l2_norm(x: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.asarray(x, dtype=float) ** 2)))


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.asarray(a, dtype=float) ** 2)))


def spectral_norm(a: np.ndarray) -> float:
    """Operator 2-norm: square root of the top eigenvalue of ``aᵀa``."""
    a = np.asarray(a, dtype=float)
    values, _ = jacobi_eigh(a.T @ a)
    return float(np.sqrt(max(values[0], 0.0)))


def gelfand_estimate(b: np.ndarray, n: int) -> float:
    """``ln ‖bⁿ‖ / n``, which tends to ``ln spectral_radius(b)`` as n grows."""
    if n < 1:
        raise ValueError("n must be positive")
    power = np.linalg.matrix_power(np.asarray(b, dtype=float), n)
    return float(np.log(spectral_norm(power)) / n)
