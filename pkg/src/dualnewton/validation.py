"""Cross-model identity checks with a machine-readable report.

Every check measures a residual that some structural property says
should vanish (or a disagreement that should not), compares it against
a fixed tolerance, and reports {name, passed, residual, tolerance}.
The suite covers all three model families so a geometry regression in
any of them turns at least one entry red.
"""

import numpy as np
from scipy.integrate import quad
from scipy.special import polygamma

from .experiments import gen_dataset
from .geometry import (
    dual_hessian_matrix,
    duality_residual,
    gradient_field,
    levi_civita_from_metric,
    newton_direction,
    second_order_retract,
)
from .linalg import fd_jacobian, solve_spd
from .models import gaussian, loglinear
from .models.betamix import BetaMixtureModel, QuadratureRule
from .models.loglinear import SubsetIndex
from .objectives import AlphaDivergenceObjective, KLProjectionObjective


def _check(name, residual, tolerance):
    residual = float(residual)
    return {
        "name": name,
        "passed": bool(residual < tolerance),
        "residual": residual,
        "tolerance": tolerance,
    }


def _loglinear_setup(lam1=0.0, lam2=0.0, alpha=1.0, seed=2):
    rng = np.random.default_rng(seed)
    index = SubsetIndex.boltzmann(3)
    eta_hat = loglinear.moments(index, rng.uniform(-0.5, 0.5, len(index)))
    obj = KLProjectionObjective(index, eta_hat, lam1, lam2)
    return index, obj, loglinear.dual_structure(index, alpha), rng


def _duality_checks(quad_nodes):
    checks = []
    res = 0.0
    for alpha in (-1.0, -0.5, 0.0, 0.5, 1.0):
        ds = gaussian.dual_structure(alpha)
        for xi in ([0.3, 1.2], [-1.0, 0.7]):
            res = max(res, duality_residual(ds, np.array(xi)))
    checks.append(_check("duality_gaussian", res, 1e-5))

    index = SubsetIndex.boltzmann(3)
    rng = np.random.default_rng(0)
    res = 0.0
    for alpha in (-1.0, 0.0, 1.0):
        ds = loglinear.dual_structure(index, alpha)
        res = max(res, duality_residual(ds, rng.uniform(-0.8, 0.8, len(index))))
    checks.append(_check("duality_loglinear", res, 1e-5))

    model, _ = gen_dataset(n_samples=1, seed=0, quad_nodes=quad_nodes)
    xi = model.generating_point()
    res = max(
        duality_residual(model.dual_structure(alpha), xi) for alpha in (0.0, 1.0)
    )
    checks.append(_check("duality_beta_mixture", res, 1e-3))
    return checks


def _flatness_checks(quad_nodes):
    checks = []
    index = SubsetIndex.boltzmann(3)
    rng = np.random.default_rng(3)
    ds = loglinear.dual_structure(index, 1.0)
    res = max(
        float(np.max(np.abs(ds.gamma(rng.uniform(-1.0, 1.0, len(index))))))
        for _ in range(3)
    )
    checks.append(_check("natural_chart_connection_vanishes", res, 1e-12))

    ds = gaussian.dual_structure(0.0)
    xi = np.array([0.4, 1.3])
    res = float(
        np.max(np.abs(ds.gamma(xi) - levi_civita_from_metric(ds.metric, xi)))
    )
    checks.append(_check("levi_civita_gaussian", res, 1e-6))

    ds = loglinear.dual_structure(index, 0.0)
    theta = np.random.default_rng(4).uniform(-0.7, 0.7, len(index))
    res = float(
        np.max(np.abs(ds.gamma(theta) - levi_civita_from_metric(ds.metric, theta)))
    )
    checks.append(_check("levi_civita_loglinear", res, 1e-5))

    model, _ = gen_dataset(n_samples=1, seed=0, quad_nodes=quad_nodes)
    ds = model.dual_structure(0.0)
    xi = model.generating_point()
    res = float(
        np.max(np.abs(ds.gamma(xi) - levi_civita_from_metric(ds.metric, xi)))
    )
    checks.append(_check("levi_civita_beta_mixture", res, 1e-3))
    return checks


def _newton_structure_checks():
    checks = []
    index, obj, ds, rng = _loglinear_setup(0.0, 0.0)
    field = gradient_field(ds, obj.eucl_grad)
    res = 0.0
    for _ in range(5):
        theta = rng.uniform(-1.0, 1.0, len(index))
        grad = obj.eucl_grad(theta)
        a = solve_spd(loglinear.fisher_metric(index, theta), grad)
        hess = dual_hessian_matrix(ds, field, theta, jacobian=obj.grad_field_jacobian)
        beta, _ = newton_direction(ds, hess, grad, theta)
        res = max(res, np.linalg.norm(beta + a) / np.linalg.norm(a))
    checks.append(_check("newton_step_is_natural_gradient_when_unregularized", res, 1e-8))

    index, obj, ds, rng = _loglinear_setup(0.5, 0.5)
    field = gradient_field(ds, obj.eucl_grad)
    sep = np.inf
    for _ in range(5):
        theta = rng.uniform(-1.0, 1.0, len(index))
        grad = obj.eucl_grad(theta)
        a = solve_spd(loglinear.fisher_metric(index, theta), grad)
        hess = dual_hessian_matrix(ds, field, theta, jacobian=obj.grad_field_jacobian)
        beta, _ = newton_direction(ds, hess, grad, theta)
        sep = min(sep, np.linalg.norm(beta + a) / np.linalg.norm(a))
    # inverted sense: regularization must separate the two directions
    checks.append(
        {
            "name": "regularization_separates_newton_from_natural_gradient",
            "passed": bool(sep >= 1e-3),
            "residual": float(sep),
            "tolerance": 1e-3,
        }
    )

    # the quadratic penalty shifts the flat-chart Euclidean Hessian by
    # exactly 2 diag(lam over coordinates)
    index, obj0, ds, rng = _loglinear_setup(0.0, 0.0, seed=7)
    _, obj1, _, _ = _loglinear_setup(0.3, 0.8, seed=7)
    theta = rng.uniform(-0.5, 0.5, len(index))
    h0 = fd_jacobian(obj0.eucl_grad, theta)
    h1 = fd_jacobian(obj1.eucl_grad, theta)
    lam = np.array([0.3 if len(s) == 1 else 0.8 for s in index.subsets])
    res = float(np.max(np.abs((h1 - h0) - 2.0 * np.diag(lam))))
    checks.append(_check("regularizer_is_diagonal_hessian_shift", res, 1e-6))
    return checks


def _retraction_check():
    ds = gaussian.dual_structure(0.5)
    xi = np.array([0.2, 1.1])
    beta = np.array([0.6, -0.4])
    # first-order agreement with the straight line: the gap is O(t^2),
    # so gap/t must vanish as the step shrinks
    t = 1e-4
    moved = second_order_retract(ds, xi, t * beta)
    res = float(np.linalg.norm(moved - xi - t * beta)) / t
    return [_check("retraction_first_order_tangency", res, 1e-3)]


def _alpha_divergence_check():
    obj = AlphaDivergenceObjective(2.0, 1.5, 1.3, 0.7, alpha_bar=3.0)
    ab = obj.alpha_bar

    def coordinate_integral(mu_t, sigma_t, mu, sigma):
        # exponent (1 + abar)/2 rides on the target factor; with it on
        # the model instead the integral diverges for abar > 1
        def integrand(x):
            log_p = -0.5 * ((x - mu_t) / sigma_t) ** 2 - 0.5 * np.log(
                2.0 * np.pi * sigma_t**2
            )
            log_q = -0.5 * ((x - mu) / sigma) ** 2 - 0.5 * np.log(
                2.0 * np.pi * sigma**2
            )
            return np.exp(0.5 * (1.0 + ab) * log_p + 0.5 * (1.0 - ab) * log_q)

        value, _ = quad(integrand, -np.inf, np.inf)
        return value

    res = 0.0
    for mu, sigma in ((0.5, 2.0), (1.5, 1.4), (2.0, 1.8)):
        j = 1.0
        for mu_t, sigma_t in zip(obj.mu_targets, obj.sigma_targets):
            j *= coordinate_integral(mu_t, sigma_t, mu, sigma)
        numeric = 4.0 / (1.0 - ab * ab) * (1.0 - j)
        closed = obj.value(np.array([mu, sigma]))
        res = max(res, abs(numeric - closed) / max(1.0, abs(closed)))
    return [_check("alpha_divergence_closed_form_vs_quadrature", res, 1e-6)]


def _quadrature_checks():
    checks = []
    model64, _ = gen_dataset(n_samples=1, seed=0, quad_nodes=64)
    model128, _ = gen_dataset(n_samples=1, seed=0, quad_nodes=128)
    xi = model64.generating_point()
    g64 = model64.fisher_metric(xi)
    g128 = model128.fisher_metric(xi)
    res = float(np.max(np.abs(g64 - g128)) / np.max(np.abs(g128)))
    checks.append(_check("fisher_metric_node_doubling_stable", res, 1e-6))

    single = BetaMixtureModel(
        weights=[1.0], alphas=[1.0], betas=[1.0],
        quadrature=QuadratureRule.gauss_legendre(64),
    )
    G = single.fisher_metric(np.array([1.0, 1.0]))
    t1, t2 = polygamma(1, 1.0), polygamma(1, 2.0)
    expected = 2.0 * np.array([[t1 - t2, -t2], [-t2, t1 - t2]])
    res = float(np.max(np.abs(G - expected)))
    checks.append(_check("single_beta_fisher_matches_trigamma", res, 1e-4))
    return checks


def run_validation(quad_nodes=64):
    """Run every structural check; returns {"passed", "checks"}."""
    checks = []
    checks.extend(_duality_checks(quad_nodes))
    checks.extend(_flatness_checks(quad_nodes))
    checks.extend(_newton_structure_checks())
    checks.extend(_retraction_check())
    checks.extend(_alpha_divergence_check())
    checks.extend(_quadrature_checks())
    return {"passed": all(c["passed"] for c in checks), "checks": checks}
