"""Dense solves and finite differences used by the geometry layer.

Matrices here are small (tens of rows), so unblocked factorizations are
fine and keep pivot handling explicit.  Everything is float64 and
single-threaded, which makes results reproducible run to run.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    NonFiniteValue,
    NotPositiveDefinite,
    SingularMatrix,
)

EPS = float(np.finfo(np.float64).eps)

# Default FD step for first derivatives: error balance of central
# differences, scaled per coordinate.
_FD_STEP = EPS ** (1.0 / 3.0)

# An LU pivot below this fraction of the infinity norm counts as singular.
_SINGULAR_RTOL = 1e-14


def _as_square(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    return A


def _check_rhs(A, b):
    b = np.asarray(b, dtype=float)
    if b.shape[0] != A.shape[0]:
        raise DimensionMismatch(
            f"matrix of size {A.shape[0]} against right-hand side of shape {b.shape}"
        )
    return b


def cholesky_lower(A, pivot_floor=0.0):
    """Lower Cholesky factor of A, reading only the lower triangle.

    Raises NotPositiveDefinite as soon as a pivot drops to
    ``pivot_floor`` or below.
    """
    A = _as_square(A)
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        pivot = A[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > pivot_floor:
            raise NotPositiveDefinite(f"pivot {pivot} at column {j}")
        L[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def solve_spd(A, b):
    """Solve A x = b for symmetric positive definite A via Cholesky."""
    A = _as_square(A)
    b = _check_rhs(A, b)
    scale = max(1.0, float(np.max(np.abs(A))) if A.size else 1.0)
    if float(np.max(np.abs(A - A.T))) > 1e-12 * scale:
        raise ValueError("solve_spd expects a symmetric matrix")
    L = cholesky_lower(A)
    y = scipy.linalg.solve_triangular(L, b, lower=True)
    return scipy.linalg.solve_triangular(L.T, y, lower=False)


def solve_general(A, b):
    """Solve A x = b by LU with partial pivoting.

    Raises SingularMatrix when some pivot falls below
    1e-14 * ||A||_inf, instead of returning garbage.
    """
    A = _as_square(A)
    b = _check_rhs(A, b)
    norm = float(np.max(np.sum(np.abs(A), axis=1))) if A.size else 0.0
    if norm == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if np.any(pivots < _SINGULAR_RTOL * norm):
        raise SingularMatrix(
            f"pivot ratio {pivots.min() / norm:.3e} below {_SINGULAR_RTOL:.0e}"
        )
    return scipy.linalg.lu_solve((lu, piv), b)


def is_spd(A, tol=0.0):
    """True when the symmetrized matrix has all Cholesky pivots > tol."""
    A = _as_square(A)
    try:
        cholesky_lower(0.5 * (A + A.T), pivot_floor=tol)
    except NotPositiveDefinite:
        return False
    return True


@dataclass(frozen=True)
class FDScheme:
    """Central-difference configuration.

    ``step=None`` selects the per-coordinate default
    cbrt(eps) * max(1, |xi_i|).
    """

    step: float | None = None
    order: str = "central-2"

    def __post_init__(self):
        if self.order != "central-2":
            raise ValueError(f"unsupported FD order {self.order!r}")
        if self.step is not None and not self.step > 0:
            raise ValueError("FD step must be positive")

    def steps(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.step is not None:
            return np.full(xi.shape, float(self.step))
        return _FD_STEP * np.maximum(1.0, np.abs(xi))


def fd_jacobian(field, xi, scheme=None):
    """Jacobian of a vector field by central differences.

    Entry (i, j) holds d field_j / d xi_i, i.e. rows index the
    differentiation direction.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 1:
        raise DimensionMismatch(f"expected a coordinate vector, got shape {xi.shape}")
    scheme = scheme or FDScheme()
    h = scheme.steps(xi)
    rows = []
    for i in range(xi.size):
        step = np.zeros_like(xi)
        step[i] = h[i]
        f_plus = np.asarray(field(xi + step), dtype=float)
        f_minus = np.asarray(field(xi - step), dtype=float)
        if not (np.all(np.isfinite(f_plus)) and np.all(np.isfinite(f_minus))):
            raise NonFiniteValue(f"field evaluation not finite at offset {i}")
        rows.append((f_plus - f_minus) / (2.0 * h[i]))
    return np.array(rows)
