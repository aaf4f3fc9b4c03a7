import csv
import json

import numpy as np
import pytest

from dualnewton import geometry, optimizers as opt
from dualnewton.errors import (
    DomainViolation,
    InsufficientIterations,
    LineSearchFailure,
)
from dualnewton.linalg import solve_spd
from dualnewton.models import loglinear
from dualnewton.objectives import KLProjectionObjective, Objective

from helpers import euclidean_structure


def scalar_problem(lam=0.5):
    index = loglinear.SubsetIndex.boltzmann(1)
    obj = KLProjectionObjective(index, np.array([0.5]), lam, 0.0)
    return index, obj, loglinear.dual_structure(index, 1.0)


def quadratic_objective(center):
    center = np.asarray(center, dtype=float)
    return Objective(
        dim=center.size,
        value=lambda x: 0.5 * float((x - center) @ (x - center)),
        eucl_grad=lambda x: x - center,
    )


def kl_problem(n=3, lam1=0.0, lam2=0.0, alpha=1.0, seed=2):
    rng = np.random.default_rng(seed)
    index = loglinear.SubsetIndex.boltzmann(n)
    eta_hat = loglinear.moments(index, rng.uniform(-0.5, 0.5, len(index)))
    obj = KLProjectionObjective(index, eta_hat, lam1, lam2)
    return index, obj, loglinear.dual_structure(index, alpha), rng


# ---- stop rule and trace ---------------------------------------------------


def test_stop_rule_validation():
    with pytest.raises(ValueError):
        opt.StopRule(grad_tol=0.0)
    with pytest.raises(ValueError):
        opt.StopRule(max_iters=-1)
    rule = opt.StopRule()
    assert rule.grad_tol == 1e-6 and rule.max_iters == 10000


def test_trace_rejects_nonincreasing_iters():
    tr = opt.OptimizerTrace()
    tr.record(1, 1.0, 0.1, 0.1, 0.5, True, 0.1)
    with pytest.raises(ValueError):
        tr.record(1, 0.5, 0.05, 0.05, 0.2, True, 0.2)
    with pytest.raises(ValueError):
        tr.record(2, 0.5, 0.05, 0.05, 0.2, True, 0.05)


def test_trace_csv_round_trip(tmp_path):
    tr = opt.OptimizerTrace()
    tr.record(1, 0.125, 0.1, 0.2, 0.3, True, 0.01)
    tr.record(2, 0.0625, 0.05, 0.1, 0.15, False, 0.02)
    path = tmp_path / "trace.csv"
    tr.write_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["iter", "f", "grad_l2", "grad_gnorm", "step_norm", "spd", "time_s"]
    assert rows[1][0] == "1" and float(rows[1][1]) == 0.125 and rows[1][5] == "1"
    assert rows[2][5] == "0"
    assert len(rows) == 3


def test_trace_summary_counts():
    tr = opt.OptimizerTrace()
    assert tr.summary()["iterations"] == 0
    tr.record(1, 1.0, 0.1, 0.1, 0.5, True, 0.1)
    s = tr.summary()
    assert s["iterations"] == 1 and s["final_f"] == 1.0
    json.dumps(s)


# ---- line search -----------------------------------------------------------


def test_wolfe_accepts_exact_quadratic_minimum():
    phi = lambda s: 0.5 * (1.0 - s) ** 2
    dphi = lambda s: s - 1.0
    assert opt.wolfe_line_search(phi, dphi, 1.0) == 1.0


def test_wolfe_quartic_satisfies_both_conditions():
    phi = lambda s: (s - 2.0) ** 4
    dphi = lambda s: 4.0 * (s - 2.0) ** 3
    s = opt.wolfe_line_search(phi, dphi, 1.0)
    assert phi(s) < phi(0.0)
    assert phi(s) <= phi(0.0) + 1e-4 * s * dphi(0.0)
    assert abs(dphi(s)) <= 0.9 * abs(dphi(0.0))


def test_wolfe_handles_infinite_overshoot():
    # simulates a trial point outside the model domain
    phi = lambda s: np.inf if s > 0.75 else 0.5 * (1.0 - s) ** 2
    dphi = lambda s: s - 1.0
    s = opt.wolfe_line_search(phi, dphi, 1.0)
    assert 0.0 < s <= 0.75
    assert phi(s) <= phi(0.0) + 1e-4 * s * dphi(0.0)


def test_wolfe_requires_descent_direction():
    with pytest.raises(ValueError):
        opt.wolfe_line_search(lambda s: s, lambda s: 1.0, 1.0)


def test_wolfe_fails_on_unbounded_ray():
    with pytest.raises(LineSearchFailure):
        opt.wolfe_line_search(lambda s: -s, lambda s: -1.0, 1.0)


# ---- dual newton -----------------------------------------------------------


def test_newton_stationary_start_zero_iterations():
    index, obj, ds, _ = kl_problem(2)
    tr = opt.dual_newton_run(ds, obj, obj._theta_hat)
    assert tr.status == opt.CONVERGED
    assert tr.n_iterations == 0
    assert len(tr.iterates) == 1


def test_newton_scalar_first_iterate():
    # hand-checked: beta = -(grad/G) / (1 + (2 lam + G')/G) at theta=1
    _, obj, ds = scalar_problem(lam=0.5)
    tr = opt.dual_newton_run(ds, obj, np.array([1.0]), opt.StopRule(max_iters=1))
    assert tr.iterates[1][0] == pytest.approx(-0.028786814197323762, abs=1e-13)


def test_newton_scalar_converges_quadratically():
    _, obj, ds = scalar_problem(lam=0.5)
    tr = opt.dual_newton_run(
        ds, obj, np.array([4.0]), opt.StopRule(grad_tol=1e-13, max_iters=50)
    )
    assert tr.status == opt.CONVERGED
    assert tr.n_iterations >= 4
    assert opt.convergence_order(tr, np.zeros(1)) >= 1.8


def test_newton_rejects_start_outside_domain():
    ds = euclidean_structure(1, in_domain=lambda xi: xi[0] > 0)
    obj = quadratic_objective([2.0])
    with pytest.raises(DomainViolation):
        opt.dual_newton_run(ds, obj, np.array([-1.0]))


def test_newton_projection_direction_matches_natural_gradient():
    # pure projection: the dual Hessian times the metric is the identity
    # map on gradient coordinates, so the Newton step is exactly -a
    index, obj, ds, rng = kl_problem(3, 0.0, 0.0)
    field = geometry.gradient_field(ds, obj.eucl_grad)
    for _ in range(10):
        theta = rng.uniform(-1.0, 1.0, len(index))
        grad = obj.eucl_grad(theta)
        a = solve_spd(loglinear.fisher_metric(index, theta), grad)
        hess = geometry.dual_hessian_matrix(
            ds, field, theta, jacobian=obj.grad_field_jacobian
        )
        beta, spd = geometry.newton_direction(ds, hess, grad, theta)
        assert spd
        assert np.linalg.norm(beta + a) <= 1e-8 * np.linalg.norm(a)


def test_newton_regularization_breaks_the_equivalence():
    index, obj, ds, rng = kl_problem(3, 0.5, 0.5)
    field = geometry.gradient_field(ds, obj.eucl_grad)
    for _ in range(5):
        theta = rng.uniform(-1.0, 1.0, len(index))
        grad = obj.eucl_grad(theta)
        a = solve_spd(loglinear.fisher_metric(index, theta), grad)
        hess = geometry.dual_hessian_matrix(
            ds, field, theta, jacobian=obj.grad_field_jacobian
        )
        beta, _ = geometry.newton_direction(ds, hess, grad, theta)
        assert np.linalg.norm(beta + a) >= 1e-3 * np.linalg.norm(a)


def test_newton_trace_rows_match_iterations():
    _, obj, ds = scalar_problem(lam=0.5)
    tr = opt.dual_newton_run(ds, obj, np.array([1.0]))
    assert tr.n_iterations == len(tr.iterates) - 1
    assert tr.iters == list(range(1, tr.n_iterations + 1))
    assert all(t2 >= t1 for t1, t2 in zip(tr.times, tr.times[1:]))


def test_newton_halves_steps_at_domain_boundary():
    ds = euclidean_structure(1, in_domain=lambda xi: xi[0] > 0.0)
    obj = quadratic_objective([-3.0])
    tr = opt.dual_newton_run(ds, obj, np.array([0.5]), opt.StopRule(max_iters=8))
    assert tr.status == opt.MAX_ITERS
    assert all(p[0] > 0.0 for p in tr.iterates)


def test_newton_damped_mode_still_converges():
    index, obj, ds, _ = kl_problem(3, 0.5, 0.5)
    tr = opt.dual_newton_run(
        ds, obj, np.full(len(index), 0.2), opt.StopRule(), damped=True
    )
    assert tr.status == opt.CONVERGED


def test_newton_does_not_mutate_inputs():
    index, obj, ds, _ = kl_problem(2, 0.5, 0.5)
    xi0 = np.full(len(index), 0.3)
    xi0_copy = xi0.copy()
    eta_before = obj.eta_hat.copy()
    opt.dual_newton_run(ds, obj, xi0)
    np.testing.assert_array_equal(xi0, xi0_copy)
    np.testing.assert_array_equal(obj.eta_hat, eta_before)


# ---- natural gradient ------------------------------------------------------


def test_natural_gradient_solves_quadratic_in_one_step():
    ds = euclidean_structure(2)
    obj = quadratic_objective([0.0, 0.0])
    tr = opt.natural_gradient_run(ds, obj, np.array([1.0, 1.0]))
    assert tr.status == opt.CONVERGED
    assert tr.n_iterations == 1
    np.testing.assert_allclose(tr.iterates[-1], 0.0, atol=1e-14)


def test_natural_gradient_converges_on_projection():
    index, obj, ds, _ = kl_problem(3, 0.5, 0.5)
    tr = opt.natural_gradient_run(ds, obj, np.full(len(index), 0.2))
    assert tr.status == opt.CONVERGED
    assert tr.grad_l2[-1] < 1e-6


def test_natural_gradient_line_search_failure_is_domain_failure():
    ds = euclidean_structure(1)
    obj = Objective(dim=1, value=lambda x: -float(x[0]), eucl_grad=lambda x: -np.ones(1))
    tr = opt.natural_gradient_run(ds, obj, np.zeros(1), opt.StopRule(max_iters=5))
    assert tr.status == opt.DOMAIN_FAILURE


# ---- mirror descent --------------------------------------------------------


def test_mirror_step_exact_on_scalar_problem():
    # eta(1) = sigmoid(1), grad = sigmoid(1) - 0.5, so one unit step
    # lands the moment exactly on the target
    index, obj, _ = scalar_problem(lam=0.0)
    theta1 = opt.mirror_step(index, obj, np.array([1.0]), 1.0)
    assert abs(theta1[0]) < 1e-10


def test_mirror_step_equals_natural_gradient_in_moment_coordinates():
    index, obj, ds, rng = kl_problem(3, 0.0, 0.0)
    for _ in range(5):
        theta = rng.uniform(-0.8, 0.8, len(index))
        s = 0.37
        eta = loglinear.moments(index, theta)
        eta_mirror = loglinear.moments(index, opt.mirror_step(index, obj, theta, s))
        # steepest descent in the moment chart: the metric there is the
        # inverse Fisher matrix, so the direction collapses to -grad_theta
        G = loglinear.fisher_metric(index, theta)
        grad_eta = solve_spd(G, obj.eucl_grad(theta))
        eta_ng = eta - s * (G @ grad_eta)
        assert np.max(np.abs(eta_mirror - eta_ng)) < 1e-9


def test_mirror_descent_converges_on_projection():
    index, obj, _, _ = kl_problem(3, 0.5, 0.5)
    tr = opt.mirror_descent_run(index, obj, np.full(len(index), 0.2))
    assert tr.status == opt.CONVERGED
    assert tr.grad_l2[-1] < 1e-6


def test_mirror_descent_stationary_start():
    index, obj, _, _ = kl_problem(2)
    tr = opt.mirror_descent_run(index, obj, obj._theta_hat)
    assert tr.status == opt.CONVERGED and tr.n_iterations == 0


# ---- adam ------------------------------------------------------------------


def test_adam_first_step_is_signed_learning_rate():
    state = opt.AdamState(lr=0.01)
    g = np.array([3.0, -0.2, 0.0007])
    step = state.step(g)
    np.testing.assert_allclose(step, -0.01 * np.sign(g), rtol=1e-4)


def test_adam_zero_gradient_leaves_state_unchanged():
    state = opt.AdamState()
    step = state.step(np.zeros(3))
    np.testing.assert_array_equal(step, 0.0)
    np.testing.assert_array_equal(state.m, 0.0)
    np.testing.assert_array_equal(state.v, 0.0)


def test_adam_moments_stay_nonnegative():
    state = opt.AdamState()
    rng = np.random.default_rng(0)
    for _ in range(50):
        state.step(rng.normal(size=4))
    assert np.all(state.v >= 0.0)


def test_adam_run_descends_quadratic():
    ds = euclidean_structure(2)
    obj = quadratic_objective([0.3, -0.1])
    tr = opt.adam_run(ds, obj, np.zeros(2), opt.StopRule(max_iters=200))
    assert tr.f_values[-1] < obj.value(np.zeros(2))
    assert tr.n_iterations == 200 or tr.status == opt.CONVERGED


def test_adam_run_converges_on_projection():
    index, obj, ds, _ = kl_problem(2, 0.5, 0.5)
    tr = opt.adam_run(ds, obj, np.full(len(index), 0.2), opt.StopRule(max_iters=5000))
    assert tr.status == opt.CONVERGED


def test_adam_respects_domain_by_halving():
    ds = euclidean_structure(1, in_domain=lambda xi: xi[0] > 0.0)
    obj = quadratic_objective([-2.0])
    tr = opt.adam_run(ds, obj, np.array([0.01]), opt.StopRule(max_iters=20))
    assert all(p[0] > 0.0 for p in tr.iterates)


# ---- convergence order -----------------------------------------------------


def synthetic_trace(errors):
    tr = opt.OptimizerTrace()
    tr.iterates = [np.array([e]) for e in errors]
    return tr


def test_order_exact_quadratic_sequence():
    tr = synthetic_trace([10.0 ** -(2.0**k) for k in range(5)])
    assert opt.convergence_order(tr, np.zeros(1)) == pytest.approx(2.0, abs=1e-9)


def test_order_exact_linear_sequence():
    tr = synthetic_trace([10.0**-k for k in range(7)])
    assert opt.convergence_order(tr, np.zeros(1)) == pytest.approx(1.0, abs=1e-9)


def test_order_requires_four_iterations():
    tr = synthetic_trace([1.0, 0.1, 0.01])
    with pytest.raises(InsufficientIterations):
        opt.convergence_order(tr, np.zeros(1))


def test_order_requires_triples_above_noise_floor():
    tr = synthetic_trace([1e-16, 1e-17, 1e-18, 1e-19, 1e-20])
    with pytest.raises(InsufficientIterations):
        opt.convergence_order(tr, np.zeros(1))
