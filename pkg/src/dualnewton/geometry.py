"""Metric and connection plumbing for dual (torsion-free) connection pairs.

Conventions used throughout:

* a metric callable maps coordinates to the SPD Gram matrix G(xi);
* a Christoffel callable maps coordinates to a second-kind tensor with
  entry (i, j, k) = Gamma^k_ij, upper index last;
* the Riemannian gradient is stored by its coordinates a = G^{-1} grad f.

The dual Hessian matrix of a gradient field a is

    H[i, j] = d a_j / d xi_i + sum_k a_k GammaDual^j_ik,

so the Newton system reads H^T beta = -a, and G @ H^T is the
self-adjointness certificate: symmetric always, positive definite
exactly when the step is a descent direction.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainViolation
from .linalg import fd_jacobian, is_spd, solve_general, solve_spd


@dataclass(frozen=True)
class DualStructure:
    """A metric with a pair of connections dual with respect to it."""

    dim: int
    metric: Callable
    gamma: Callable
    gamma_dual: Callable
    alpha: float
    in_domain: Optional[Callable] = None

    def contains(self, xi):
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.dim,) or not np.all(np.isfinite(xi)):
            return False
        return bool(self.in_domain(xi)) if self.in_domain is not None else True


def riemannian_gradient(structure, eucl_grad, xi):
    """Coordinates of the metric gradient: solve G(xi) a = eucl_grad."""
    return solve_spd(structure.metric(xi), np.asarray(eucl_grad, dtype=float))


def gradient_field(structure, eucl_grad_fn):
    """Wrap a Euclidean gradient function into the field xi -> G^{-1} grad f."""

    def field(xi):
        return solve_spd(structure.metric(xi), eucl_grad_fn(xi))

    return field


def dual_hessian_matrix(structure, grad_field, xi, jacobian=None, scheme=None):
    """Dual Hessian H[i, j] = d a_j/d xi_i + sum_k a_k GammaDual^j_ik.

    The Jacobian of the gradient field comes from the ``jacobian``
    callback when given, otherwise from central finite differences.
    """
    xi = np.asarray(xi, dtype=float)
    a = np.asarray(grad_field(xi), dtype=float)
    J = np.asarray(jacobian(xi)) if jacobian is not None else fd_jacobian(
        grad_field, xi, scheme
    )
    gamma_dual = structure.gamma_dual(xi)
    return J + np.einsum("k,ikj->ij", a, gamma_dual)


def newton_direction(structure, hess, eucl_grad, xi):
    """Solve H^T beta = -G^{-1} grad f.

    Returns (beta, spd_flag) where spd_flag reports whether G @ H^T is
    positive definite, the certificate that beta is a descent direction.
    A zero gradient short-circuits to beta = 0 exactly.
    """
    xi = np.asarray(xi, dtype=float)
    eucl_grad = np.asarray(eucl_grad, dtype=float)
    G = structure.metric(xi)
    spd_flag = is_spd(G @ hess.T)
    if not np.any(eucl_grad):
        return np.zeros_like(eucl_grad), spd_flag
    a = solve_spd(G, eucl_grad)
    beta = solve_general(hess.T, -a)
    return beta, spd_flag


def second_order_retract(structure, xi, beta):
    """Quadratic retraction xi + beta - 0.5 Gamma(beta, beta).

    Uses the primal connection's symbols.  Raises DomainViolation when
    the result leaves the model's chart domain; callers shrink beta and
    retry.
    """
    xi = np.asarray(xi, dtype=float)
    beta = np.asarray(beta, dtype=float)
    gamma = structure.gamma(xi)
    new = xi + beta - 0.5 * np.einsum("jki,j,k->i", gamma, beta, beta)
    if not structure.contains(new):
        raise DomainViolation(f"retraction left the chart domain at {new}")
    return new


def metric_derivatives(metric, xi, scheme=None):
    """Tensor dg[k, i, j] = d g_ij / d xi_k by central differences."""
    xi = np.asarray(xi, dtype=float)
    n = xi.size
    flat = lambda x: np.asarray(metric(x), dtype=float).ravel()
    return fd_jacobian(flat, xi, scheme).reshape(n, n, n)


def levi_civita_from_metric(metric, xi, scheme=None):
    """Second-kind Levi-Civita symbols from finite differences of g."""
    xi = np.asarray(xi, dtype=float)
    n = xi.size
    dg = metric_derivatives(metric, xi, scheme)
    # first kind: Gamma_{ij,k} = (d_i g_jk + d_j g_ik - d_k g_ij) / 2
    first = 0.5 * (dg + dg.transpose(1, 0, 2) - np.einsum("kij->ijk", dg))
    G = np.asarray(metric(xi), dtype=float)
    raised = solve_spd(G, first.reshape(n * n, n).T)
    return raised.T.reshape(n, n, n)


def lower_index(gamma, G):
    """First-kind symbols Gamma_{ij,k} = sum_s Gamma^s_ij g_sk."""
    return np.einsum("ijs,sk->ijk", gamma, G)


def duality_residual(structure, xi, scheme=None):
    """Max violation of d_k g_ij = Gamma_{ki,j} + GammaDual_{kj,i}."""
    xi = np.asarray(xi, dtype=float)
    G = np.asarray(structure.metric(xi), dtype=float)
    dg = metric_derivatives(structure.metric, xi, scheme)
    low = lower_index(structure.gamma(xi), G)
    low_dual = lower_index(structure.gamma_dual(xi), G)
    residual = dg - low - np.transpose(low_dual, (0, 2, 1))
    return float(np.max(np.abs(residual)))
