"""Mixture of K product-Beta densities on the open unit square.

The mixture weights are fixed; the optimization coordinates are the 2K
shape parameters xi = (a_1, b_1, ..., a_K, b_K), all positive.  The
Fisher metric and alpha-connection symbols have no closed form here, so
expectations over the square are taken with a tensor-product
Gauss-Legendre rule.  Per-component second score derivatives are
constant in x (each component is an exponential family in its shapes),
which keeps the integrand assembly analytic.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln, digamma, logsumexp, polygamma

from ..errors import DimensionMismatch, DomainViolation, QuadratureUnderflow
from ..geometry import DualStructure
from ..linalg import solve_spd

_LOG_TINY = -708.0  # below this, exp underflows to zero in float64


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights integrating over the open interval (0, 1)."""

    nodes: tuple
    weights: tuple

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise DimensionMismatch("nodes and weights must be equal-length vectors")
        if np.any(nodes <= 0) or np.any(nodes >= 1):
            raise ValueError("nodes must lie strictly inside (0, 1)")

    @classmethod
    def gauss_legendre(cls, n_nodes=64):
        """Tensor-factor Gauss-Legendre rule on (0, 1).

        The raw rule is pushed through the quintic smoothstep
        t -> t^3 (10 - 15 t + 6 t^2), which clusters nodes at both
        endpoints.  Score integrands carry log x and log(1-x) factors
        whose endpoint singularities would otherwise dominate the
        error; the reparameterized rule drives them below 1e-7 at 64
        nodes while keeping every node strictly interior.
        """
        t, w = np.polynomial.legendre.leggauss(int(n_nodes))
        t = 0.5 * (t + 1.0)
        w = 0.5 * w
        x = t**3 * (10.0 - 15.0 * t + 6.0 * t * t)
        return cls(tuple(x), tuple(w * 30.0 * t * t * (1.0 - t) ** 2))

    @property
    def n_nodes(self):
        return len(self.nodes)

    def grid(self):
        """Tensor-product nodes (n^2, 2) and weights (n^2,) on the square."""
        x = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        xx, yy = np.meshgrid(x, x, indexing="ij")
        points = np.column_stack([xx.ravel(), yy.ravel()])
        return points, np.outer(w, w).ravel()


def _check_shapes(xi, n_components):
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (2 * n_components,):
        raise DimensionMismatch(
            f"expected {2 * n_components} shape parameters, got shape {xi.shape}"
        )
    if not (np.all(np.isfinite(xi)) and np.all(xi > 0)):
        raise DomainViolation("all shape parameters must be positive and finite")
    return xi


@dataclass
class BetaMixtureModel:
    """Fixed-weight Beta mixture with generating shapes for sampling."""

    weights: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    quadrature: QuadratureRule = field(
        default_factory=lambda: QuadratureRule.gauss_legendre(64)
    )

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.betas = np.asarray(self.betas, dtype=float)
        k = self.weights.size
        if self.alphas.shape != (k,) or self.betas.shape != (k,):
            raise DimensionMismatch("weights and shape vectors disagree on K")
        if np.any(self.weights <= 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be positive and sum to one")
        if np.any(self.alphas <= 0) or np.any(self.betas <= 0):
            raise ValueError("generating shapes must be positive")
        self._node_cache = {}

    @property
    def n_components(self):
        return self.weights.size

    @property
    def dim(self):
        return 2 * self.n_components

    def generating_point(self):
        return np.column_stack([self.alphas, self.betas]).ravel()

    # ---- pointwise quantities -------------------------------------------

    def component_log_density(self, xi, x):
        """Per-component product-Beta log densities, shape (N, K)."""
        xi = _check_shapes(xi, self.n_components)
        a = xi[0::2]
        b = xi[1::2]
        x = np.atleast_2d(np.asarray(x, dtype=float))
        lx = np.log(x).sum(axis=1)
        l1x = np.log1p(-x).sum(axis=1)
        return (
            np.outer(lx, a - 1.0)
            + np.outer(l1x, b - 1.0)
            - 2.0 * betaln(a, b)[None, :]
        )

    def log_density(self, xi, x):
        comp = self.component_log_density(xi, x)
        return logsumexp(comp + np.log(self.weights)[None, :], axis=1)

    def scores(self, xi, x):
        """Mixture log-density gradient rows, one per point, shape (N, 2K).

        Also returns the responsibilities, the per-component raw score
        pairs, and the mixture log-density, which the geometry assembly
        reuses.
        """
        xi = _check_shapes(xi, self.n_components)
        a = xi[0::2]
        b = xi[1::2]
        x = np.atleast_2d(np.asarray(x, dtype=float))
        comp = self.component_log_density(xi, x) + np.log(self.weights)[None, :]
        logp = logsumexp(comp, axis=1)
        resp = np.exp(comp - logp[:, None])
        lx = np.log(x).sum(axis=1)
        l1x = np.log1p(-x).sum(axis=1)
        dig_ab = digamma(a + b)
        u_a = lx[:, None] - 2.0 * digamma(a)[None, :] + 2.0 * dig_ab[None, :]
        u_b = l1x[:, None] - 2.0 * digamma(b)[None, :] + 2.0 * dig_ab[None, :]
        s = np.empty((x.shape[0], self.dim))
        s[:, 0::2] = resp * u_a
        s[:, 1::2] = resp * u_b
        return s, resp, (u_a, u_b), logp

    def _component_curvature(self, xi):
        """Constant per-component Hessian blocks of the component
        log-densities: trigamma combinations only."""
        xi = _check_shapes(xi, self.n_components)
        a = xi[0::2]
        b = xi[1::2]
        tri_ab = polygamma(1, a + b)
        blocks = np.zeros((self.n_components, 2, 2))
        blocks[:, 0, 0] = -2.0 * polygamma(1, a) + 2.0 * tri_ab
        blocks[:, 1, 1] = -2.0 * polygamma(1, b) + 2.0 * tri_ab
        blocks[:, 0, 1] = blocks[:, 1, 0] = 2.0 * tri_ab
        return blocks

    # ---- quadrature geometry --------------------------------------------

    def _node_eval(self, xi):
        xi = _check_shapes(xi, self.n_components)
        key = xi.tobytes()
        if key in self._node_cache:
            return self._node_cache[key]
        points, w = self.quadrature.grid()
        s, resp, (u_a, u_b), logp = self.scores(xi, points)
        if float(np.max(logp)) < _LOG_TINY:
            raise QuadratureUnderflow("mixture density underflowed at every node")
        wp = w * np.exp(logp)
        # second log-derivative at each node:
        #   sum_k r_k (u_k u_k^T + C_k) - s s^T
        # assembled blockwise since u_k lives on component k's two slots
        n = points.shape[0]
        K = self.n_components
        curv = self._component_curvature(xi)
        second = np.zeros((n, self.dim, self.dim))
        for k in range(K):
            i = 2 * k
            ua, ub = u_a[:, k], u_b[:, k]
            r = resp[:, k]
            second[:, i, i] = r * (ua * ua + curv[k, 0, 0])
            second[:, i + 1, i + 1] = r * (ub * ub + curv[k, 1, 1])
            cross = r * (ua * ub + curv[k, 0, 1])
            second[:, i, i + 1] = cross
            second[:, i + 1, i] = cross
        second -= s[:, :, None] * s[:, None, :]
        out = {"wp": wp, "s": s, "second": second}
        if len(self._node_cache) >= 8:
            self._node_cache.pop(next(iter(self._node_cache)))
        self._node_cache[key] = out
        return out

    def fisher_metric(self, xi):
        ev = self._node_eval(xi)
        return np.einsum("n,ni,nj->ij", ev["wp"], ev["s"], ev["s"])

    def christoffel_first_kind(self, xi, alpha):
        ev = self._node_eval(xi)
        c = 0.5 * (1.0 - alpha)
        integrand = ev["second"] + c * ev["s"][:, :, None] * ev["s"][:, None, :]
        return np.einsum("n,nij,nk->ijk", ev["wp"], integrand, ev["s"])

    def christoffel(self, xi, alpha):
        m = self.dim
        first = self.christoffel_first_kind(xi, alpha)
        G = self.fisher_metric(xi)
        raised = solve_spd(G, first.reshape(m * m, m).T)
        return raised.T.reshape(m, m, m)

    def geometry(self, xi, alpha):
        """Metric and second-kind symbols in one call."""
        return self.fisher_metric(xi), self.christoffel(xi, alpha)

    def in_domain(self, xi):
        xi = np.asarray(xi, dtype=float)
        return (
            xi.shape == (self.dim,)
            and bool(np.all(np.isfinite(xi)))
            and bool(np.all(xi > 0))
        )

    def dual_structure(self, alpha):
        return DualStructure(
            dim=self.dim,
            metric=self.fisher_metric,
            gamma=lambda xi: self.christoffel(xi, alpha),
            gamma_dual=lambda xi: self.christoffel(xi, -alpha),
            alpha=alpha,
            in_domain=self.in_domain,
        )

    # ---- sampling --------------------------------------------------------

    def sample(self, n_samples, seed):
        """Draw n_samples points, two Beta variates per point, each Beta
        realized as a gamma ratio.  Fully determined by the seed."""
        rng = np.random.default_rng(seed)
        comps = rng.choice(self.n_components, size=n_samples, p=self.weights)
        a = self.alphas[comps]
        b = self.betas[comps]
        cols = []
        for _ in range(2):
            g1 = rng.gamma(shape=a)
            g2 = rng.gamma(shape=b)
            cols.append(g1 / (g1 + g2))
        x = np.column_stack(cols)
        if np.any(x <= 0) or np.any(x >= 1):
            raise DomainViolation("degenerate Beta draw on the boundary")
        return x
