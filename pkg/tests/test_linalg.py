import numpy as np
import pytest
from numpy.testing import assert_allclose

from dualnewton.errors import (
    DimensionMismatch,
    NonFiniteValue,
    NotPositiveDefinite,
    SingularMatrix,
)
from dualnewton.linalg import FDScheme, fd_jacobian, is_spd, solve_general, solve_spd


def test_solve_spd_identity():
    b = np.array([3.0, -1.0, 2.0])
    assert_allclose(solve_spd(np.eye(3), b), b, rtol=0, atol=0)


def test_solve_spd_small_system():
    # hand elimination: inv([[4,2],[2,3]]) = [[3,-2],[-2,4]]/8
    A = np.array([[4.0, 2.0], [2.0, 3.0]])
    b = np.array([2.0, 5.0])
    assert_allclose(solve_spd(A, b), [-0.5, 2.0], atol=1e-14)


def test_solve_spd_rejects_indefinite():
    A = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(NotPositiveDefinite):
        solve_spd(A, np.ones(2))


def test_solve_spd_rejects_asymmetric():
    A = np.array([[2.0, 1.0], [0.0, 2.0]])
    with pytest.raises(ValueError):
        solve_spd(A, np.ones(2))


def test_solve_spd_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_spd(np.eye(3), np.ones(2))
    with pytest.raises(DimensionMismatch):
        solve_spd(np.ones((2, 3)), np.ones(2))


@pytest.mark.parametrize("n", [1, 2, 5, 16, 64])
def test_solve_spd_residual_random(n):
    rng = np.random.default_rng(n)
    M = rng.standard_normal((n, n))
    A = M @ M.T + n * np.eye(n)
    b = rng.standard_normal(n)
    x = solve_spd(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * max(1.0, np.linalg.norm(b))


def test_solve_general_permutation():
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    b = np.array([7.0, -3.0])
    assert_allclose(solve_general(P, b), [-3.0, 7.0], atol=0)


def test_solve_general_singular():
    with pytest.raises(SingularMatrix):
        solve_general(np.array([[1.0, 1.0], [1.0, 1.0]]), np.ones(2))
    with pytest.raises(SingularMatrix):
        solve_general(np.zeros((2, 2)), np.ones(2))


@pytest.mark.parametrize("n", [2, 7, 33])
def test_solve_general_residual_random(n):
    rng = np.random.default_rng(100 + n)
    A = rng.standard_normal((n, n)) + n * np.eye(n)
    b = rng.standard_normal(n)
    x = solve_general(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * max(1.0, np.linalg.norm(b))


def test_fd_jacobian_convention():
    # field(xi) = (xi0^2, xi1): rows differentiate, columns index outputs
    field = lambda xi: np.array([xi[0] ** 2, xi[1]])
    J = fd_jacobian(field, np.array([3.0, 1.0]))
    assert_allclose(J, [[6.0, 0.0], [0.0, 1.0]], atol=1e-6)


def test_fd_jacobian_quadratic_exact():
    # central differences are exact on degree <= 2 up to roundoff
    rng = np.random.default_rng(11)
    for _ in range(5):
        n = 4
        Q = rng.standard_normal((n, n))
        c = rng.standard_normal(n)
        field = lambda xi: Q @ xi * (xi @ xi) * 0 + Q @ xi + c + 0.5 * xi * xi
        xi = rng.standard_normal(n)
        J = fd_jacobian(field, xi)
        expected = Q.T + np.diag(xi)
        assert_allclose(J, expected, atol=1e-6)


def test_fd_jacobian_rectangular_output():
    field = lambda xi: np.array([xi[0] + xi[1], xi[0] - xi[1], 2.0 * xi[0]])
    J = fd_jacobian(field, np.zeros(2))
    assert J.shape == (2, 3)
    assert_allclose(J, [[1.0, 1.0, 2.0], [1.0, -1.0, 0.0]], atol=1e-8)


def test_fd_jacobian_nonfinite():
    # sqrt goes NaN on the negative probe point
    field = lambda xi: np.array([np.sqrt(xi[0])])
    with np.errstate(invalid="ignore"):
        with pytest.raises(NonFiniteValue):
            fd_jacobian(field, np.array([0.0]))


def test_fd_scheme_fixed_step():
    scheme = FDScheme(step=1e-4)
    assert_allclose(scheme.steps(np.array([0.0, 100.0])), [1e-4, 1e-4])
    with pytest.raises(ValueError):
        FDScheme(step=-1.0)
    with pytest.raises(ValueError):
        FDScheme(order="forward-1")


def test_is_spd_cases():
    assert is_spd(np.eye(3))
    assert not is_spd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    rng = np.random.default_rng(3)
    M = rng.standard_normal((6, 6))
    fisher_like = M @ M.T + 1e-3 * np.eye(6)
    assert is_spd(fisher_like + 2.0 * np.eye(6))


def test_is_spd_symmetrization_jitter():
    rng = np.random.default_rng(4)
    M = rng.standard_normal((5, 5))
    A = M @ M.T + 5 * np.eye(5)
    jitter = 1e-14 * rng.standard_normal((5, 5))
    assert is_spd(A + jitter) == is_spd(A)
