"""Isotropic bivariate Gaussian family N((mu, mu), sigma^2 I).

Coordinates are xi = (mu, sigma) with sigma > 0.  Both the Fisher metric
and the alpha-connection symbols have closed forms, which makes this the
reference model for checking the finite-difference paths elsewhere.
"""

import numpy as np

from ..errors import DomainViolation
from ..geometry import DualStructure


def _check(xi):
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (2,):
        raise DomainViolation(f"expected (mu, sigma), got shape {xi.shape}")
    if not (np.all(np.isfinite(xi)) and xi[1] > 0):
        raise DomainViolation(f"sigma must be positive, got {xi[1]}")
    return xi


def fisher_metric(xi):
    sigma = _check(xi)[1]
    return np.diag([2.0 / sigma**2, 4.0 / sigma**2])


def christoffel(xi, alpha):
    """Second-kind symbols, entry (i, j, k) = Gamma^k_ij.

    Only three independent entries survive: the mu-sigma mixed symbol
    and the two diagonal sigma symbols.
    """
    sigma = _check(xi)[1]
    gamma = np.zeros((2, 2, 2))
    gamma[0, 1, 0] = gamma[1, 0, 0] = -(1.0 + alpha) / sigma
    gamma[0, 0, 1] = (1.0 - alpha) / (2.0 * sigma)
    gamma[1, 1, 1] = -(1.0 + 2.0 * alpha) / sigma
    return gamma


def in_domain(xi):
    xi = np.asarray(xi, dtype=float)
    return xi.shape == (2,) and bool(np.all(np.isfinite(xi))) and xi[1] > 0


def dual_structure(alpha):
    return DualStructure(
        dim=2,
        metric=fisher_metric,
        gamma=lambda xi: christoffel(xi, alpha),
        gamma_dual=lambda xi: christoffel(xi, -alpha),
        alpha=alpha,
        in_domain=in_domain,
    )


def log_density(x, xi):
    """Model log-density at points x of shape (..., 2)."""
    mu, sigma = _check(xi)
    x = np.asarray(x, dtype=float)
    quad = (x[..., 0] - mu) ** 2 + (x[..., 1] - mu) ** 2
    return -np.log(2.0 * np.pi * sigma**2) - 0.5 * quad / sigma**2
