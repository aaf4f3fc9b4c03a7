"""Finite-difference oracles and tiny fixtures shared by the test modules."""

import numpy as np

from dualnewton.geometry import DualStructure
from dualnewton.linalg import EPS


def euclidean_structure(n, in_domain=None):
    zero = lambda xi: np.zeros((n, n, n))
    return DualStructure(
        dim=n,
        metric=lambda xi: np.eye(n),
        gamma=zero,
        gamma_dual=zero,
        alpha=0.0,
        in_domain=in_domain,
    )


def fd_hessian(f, x):
    """Central second-difference Hessian with eps**(1/4) steps."""
    x = np.asarray(x, dtype=float)
    m = x.size
    H = np.empty((m, m))
    hs = [EPS**0.25 * max(1.0, abs(v)) for v in x]
    f0 = f(x)
    for i in range(m):
        for j in range(i, m):
            if i == j:
                p, q = x.copy(), x.copy()
                p[i] += hs[i]
                q[i] -= hs[i]
                H[i, i] = (f(p) - 2.0 * f0 + f(q)) / hs[i] ** 2
            else:
                pp, pm, mp, mm = x.copy(), x.copy(), x.copy(), x.copy()
                pp[[i, j]] += [hs[i], hs[j]]
                pm[[i, j]] += [hs[i], -hs[j]]
                mp[[i, j]] += [-hs[i], hs[j]]
                mm[[i, j]] += [-hs[i], -hs[j]]
                H[i, j] = H[j, i] = (f(pp) - f(pm) - f(mp) + f(mm)) / (
                    4.0 * hs[i] * hs[j]
                )
    return H


def fd_gradient(f, x):
    """Central first differences with eps**(1/3) steps."""
    x = np.asarray(x, dtype=float)
    g = np.empty(x.size)
    for i in range(x.size):
        h = EPS ** (1.0 / 3.0) * max(1.0, abs(x[i]))
        p, q = x.copy(), x.copy()
        p[i] += h
        q[i] -= h
        g[i] = (f(p) - f(q)) / (p[i] - q[i])
    return g
