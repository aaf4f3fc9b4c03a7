"""Log-linear models on binary states with pairwise (Boltzmann) submanifolds.

A model is a pair (index, theta): the index fixes which interaction
subsets carry a parameter, theta holds the natural parameters.  All
expectations are exact enumerations over the 2^n states, so n stays small.
"""

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from ..errors import DimensionMismatch, MomentInfeasible, NonFiniteValue
from ..geometry import DualStructure
from ..linalg import solve_spd

# Enumeration over 2^n states; keep n well below memory trouble.
MAX_VARS = 16

_INVERSION_TOL = 1e-12
_INVERSION_MAX_ITERS = 200


@dataclass(frozen=True)
class SubsetIndex:
    """Ordered collection of interaction subsets of {1, ..., n_vars}.

    Subsets are sorted tuples of 1-based variable ids.  The order of
    ``subsets`` fixes the coordinate order of every vector and matrix
    produced for this index.
    """

    n_vars: int
    subsets: tuple

    def __post_init__(self):
        if not 1 <= self.n_vars <= MAX_VARS:
            raise ValueError(f"n_vars must be in 1..{MAX_VARS}, got {self.n_vars}")
        seen = set()
        for A in self.subsets:
            if not A or tuple(sorted(A)) != tuple(A):
                raise ValueError(f"subset {A} must be nonempty and sorted")
            if any(not 1 <= i <= self.n_vars for i in A):
                raise ValueError(f"subset {A} has ids outside 1..{self.n_vars}")
            if A in seen:
                raise ValueError(f"duplicate subset {A}")
            seen.add(A)

    @classmethod
    def boltzmann(cls, n_vars):
        """Singletons then pairs, each block in lexicographic order."""
        singles = [(i,) for i in range(1, n_vars + 1)]
        pairs = [(i, j) for i, j in itertools.combinations(range(1, n_vars + 1), 2)]
        return cls(n_vars, tuple(singles + pairs))

    @classmethod
    def full(cls, n_vars):
        """All nonempty subsets, ordered by size then lexicographically."""
        subsets = []
        for r in range(1, n_vars + 1):
            subsets.extend(itertools.combinations(range(1, n_vars + 1), r))
        return cls(n_vars, tuple(subsets))

    def __len__(self):
        return len(self.subsets)

    def keys(self):
        """Serialization keys, e.g. (1, 3, 4) -> "1,3,4"."""
        return [",".join(str(i) for i in A) for A in self.subsets]

    @staticmethod
    def parse_key(key):
        return tuple(int(tok) for tok in key.split(","))


@lru_cache(maxsize=32)
def _states(n_vars):
    # row x = binary digits of x, column i = variable i+1
    grid = np.arange(2**n_vars)[:, None] >> np.arange(n_vars)
    return (grid & 1).astype(float)


@lru_cache(maxsize=64)
def feature_matrix(index):
    """(2^n, m) matrix of sufficient statistics prod_{i in A} x_i."""
    states = _states(index.n_vars)
    cols = [states[:, [i - 1 for i in A]].prod(axis=1) for A in index.subsets]
    return np.column_stack(cols)


def _check_theta(index, theta):
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (len(index),):
        raise DimensionMismatch(
            f"theta shape {theta.shape} does not match index size {len(index)}"
        )
    if not np.all(np.isfinite(theta)):
        raise NonFiniteValue("theta must be finite")
    return theta


def log_partition(index, theta):
    """log sum_x exp(theta . F(x)), stabilized."""
    theta = _check_theta(index, theta)
    return float(logsumexp(feature_matrix(index) @ theta))


def log_probabilities(index, theta):
    theta = _check_theta(index, theta)
    u = feature_matrix(index) @ theta
    return u - logsumexp(u)


def probabilities(index, theta):
    return np.exp(log_probabilities(index, theta))


def negative_entropy(probs):
    """sum p log p with the 0 log 0 = 0 convention."""
    probs = np.asarray(probs, dtype=float)
    mask = probs > 0
    return float(np.sum(probs[mask] * np.log(probs[mask])))


def moments(index, theta, query=None):
    """Expectations of the query index's sufficient statistics.

    ``query`` defaults to the model's own index, giving the dual
    (moment) coordinates of theta.
    """
    p = probabilities(index, theta)
    F = feature_matrix(query if query is not None else index)
    if F.shape[0] != p.shape[0]:
        raise DimensionMismatch("query index is over a different variable count")
    return p @ F


def fisher_metric(index, theta):
    """Covariance of the sufficient statistics at theta."""
    p = probabilities(index, theta)
    F = feature_matrix(index)
    eta = p @ F
    centered = F - eta
    return (centered * p[:, None]).T @ centered


def third_central_moment(index, theta):
    """Symmetric tensor E[(F_A - eta_A)(F_B - eta_B)(F_C - eta_C)]."""
    p = probabilities(index, theta)
    F = feature_matrix(index)
    centered = F - p @ F
    return np.einsum("x,xa,xb,xc->abc", p, centered, centered, centered)


def christoffel_first_kind(index, theta, alpha):
    """First-kind alpha-connection symbols: (1 - alpha)/2 times the
    third central moment of the sufficient statistics."""
    return 0.5 * (1.0 - alpha) * third_central_moment(index, theta)


def christoffel(index, theta, alpha):
    """Second-kind symbols, entry (A, B, C) = Gamma^C_AB."""
    m = len(index)
    first = christoffel_first_kind(index, theta, alpha)
    if alpha == 1.0:
        return np.zeros((m, m, m))
    G = fisher_metric(index, theta)
    raised = solve_spd(G, first.reshape(m * m, m).T)
    return raised.T.reshape(m, m, m)


def moment_to_natural(index, eta, theta0=None):
    """Invert the moment map by damped Newton on the log partition.

    Raises MomentInfeasible when the residual cannot be driven below
    1e-12 within the iteration budget, which covers moment vectors
    outside the marginal polytope.
    """
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (len(index),):
        raise DimensionMismatch(
            f"eta shape {eta.shape} does not match index size {len(index)}"
        )
    theta = np.zeros(len(index)) if theta0 is None else np.array(theta0, dtype=float)

    def potential(t):
        return log_partition(index, t) - float(t @ eta)

    value = potential(theta)
    for _ in range(_INVERSION_MAX_ITERS):
        residual = moments(index, theta) - eta
        if float(np.max(np.abs(residual))) < _INVERSION_TOL:
            return theta
        try:
            step = solve_spd(fisher_metric(index, theta), -residual)
        except Exception as exc:
            raise MomentInfeasible(f"inner Newton solve failed: {exc}") from exc
        t = 1.0
        for _ in range(60):
            candidate = theta + t * step
            cand_value = potential(candidate)
            if np.isfinite(cand_value) and cand_value <= value:
                theta, value = candidate, cand_value
                break
            t *= 0.5
        else:
            raise MomentInfeasible("damped Newton made no progress")
    raise MomentInfeasible(
        f"no natural parameter reproduces the moments within {_INVERSION_MAX_ITERS} iterations"
    )


def natural_to_moment(index, theta):
    """Forward Legendre map, mirror image of moment_to_natural."""
    return moments(index, theta)


def in_domain(index, theta):
    theta = np.asarray(theta, dtype=float)
    return theta.shape == (len(index),) and bool(np.all(np.isfinite(theta)))


def dual_structure(index, alpha):
    return DualStructure(
        dim=len(index),
        metric=lambda th: fisher_metric(index, th),
        gamma=lambda th: christoffel(index, th, alpha),
        gamma_dual=lambda th: christoffel(index, th, -alpha),
        alpha=alpha,
        in_domain=lambda th: in_domain(index, th),
    )
