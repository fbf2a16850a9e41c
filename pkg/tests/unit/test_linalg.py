"""Unit tests for the in-house eigen solvers and matrix norms."""

import numpy as np
import pytest

from src.analysis.linalg import (
    eigenvalues,
    frobenius_norm,
    gelfand_estimate,
    hessenberg,
    jacobi_eigh,
    l2_norm,
    spectral_norm,
    spectral_radius,
)
from src.errors import NoConvergence


def _match(found, expected, tol):
    """Every expected eigenvalue has a found one within ``tol``."""
    found = np.asarray(found)
    for value in expected:
        assert np.min(np.abs(found - value)) < tol


@pytest.fixture
def random_symmetric():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((5, 5))
    return a @ a.T + np.eye(5)


class TestJacobi:
    def test_matches_lapack(self, random_symmetric):
        values, vectors = jacobi_eigh(random_symmetric)
        expected = np.sort(np.linalg.eigvalsh(random_symmetric))[::-1]
        np.testing.assert_allclose(values, expected, rtol=1e-10)
        np.testing.assert_allclose(random_symmetric @ vectors, vectors * values, atol=1e-9)

    def test_vectors_orthonormal(self, random_symmetric):
        _, vectors = jacobi_eigh(random_symmetric)
        np.testing.assert_allclose(vectors.T @ vectors, np.eye(5), atol=1e-10)

    def test_characteristic_polynomial_oracle(self):
        a = np.array([[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 1.0]])
        values, _ = jacobi_eigh(a)
        roots = np.sort(np.roots(np.poly(a)).real)[::-1]
        np.testing.assert_allclose(values, roots, atol=1e-8)

    def test_zero_matrix(self):
        values, vectors = jacobi_eigh(np.zeros((3, 3)))
        np.testing.assert_array_equal(values, np.zeros(3))
        np.testing.assert_array_equal(vectors, np.eye(3))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            jacobi_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_sweep_limit(self, random_symmetric):
        with pytest.raises(NoConvergence):
            jacobi_eigh(random_symmetric, max_sweeps=0)


class TestEigenvalues:
    def test_identity(self):
        assert spectral_radius(np.eye(3)) == pytest.approx(1.0)

    def test_diagonal(self):
        assert spectral_radius(np.diag([0.5, -0.7])) == pytest.approx(0.7)

    def test_complex_pair(self):
        rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
        values = eigenvalues(rotation)
        _match(values, [1j, -1j], 1e-10)

    def test_random_matrix_matches_lapack(self):
        a = np.random.default_rng(3).standard_normal((6, 6))
        values = eigenvalues(a)
        _match(values, np.linalg.eigvals(a), 1e-8)
        assert np.all(np.diff(np.abs(values)) <= 1e-12)

    def test_characteristic_polynomial_oracle(self):
        b = np.array([[0.98, 0.01, -0.02], [0.03, 0.97, 0.01], [0.0, 0.02, 0.93]])
        _match(eigenvalues(b), np.roots(np.poly(b)), 1e-8)

    @pytest.mark.parametrize("k", [-2.0, 0.5])
    def test_radius_homogeneous(self, k):
        b = np.array([[0.6, 0.3], [-0.2, 0.4]])
        assert spectral_radius(k * b) == pytest.approx(abs(k) * spectral_radius(b), rel=1e-10)

    def test_iteration_cap(self):
        a = np.random.default_rng(5).standard_normal((4, 4))
        with pytest.raises(NoConvergence):
            eigenvalues(a, max_iter=1)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            eigenvalues(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestHessenberg:
    def test_structure_and_spectrum(self):
        a = np.random.default_rng(8).standard_normal((5, 5))
        h = hessenberg(a)
        assert np.all(np.tril(h, -2) == 0.0)
        _match(np.linalg.eigvals(h), np.linalg.eigvals(a), 1e-9)


class TestNorms:
    def test_l2_and_frobenius(self):
        assert l2_norm([3.0, 4.0]) == pytest.approx(5.0)
        assert frobenius_norm(np.array([[1.0, 2.0], [2.0, 4.0]])) == pytest.approx(5.0)

    def test_spectral_norm(self):
        a = np.random.default_rng(2).standard_normal((4, 3))
        assert spectral_norm(a) == pytest.approx(np.linalg.norm(a, 2), rel=1e-10)

    def test_gelfand_estimate_tends_to_log_radius(self):
        b = np.array([[0.9, 0.5], [0.0, 0.5]])
        assert gelfand_estimate(b, 400) == pytest.approx(np.log(0.9), abs=1e-2)

    def test_gelfand_rejects_zero_power(self):
        with pytest.raises(ValueError):
            gelfand_estimate(np.eye(2), 0)
