"""Iterative methods sharing one trace format and one stopping rule.

All four methods stop when the l2 norm of the Riemannian gradient
coordinates a = G^{-1} grad f drops below the tolerance, so iteration
counts are directly comparable.  A trace row is one completed step;
convergence at the starting point yields an empty trace.
"""

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainViolation,
    DivergenceUndefined,
    InsufficientIterations,
    LineSearchFailure,
    MomentInfeasible,
    NonFiniteValue,
    NotPositiveDefinite,
    QuadratureUnderflow,
    SingularMatrix,
)
from .geometry import (
    dual_hessian_matrix,
    gradient_field,
    newton_direction,
    second_order_retract,
)
from .linalg import EPS, solve_spd
from .models import loglinear

CONVERGED = "Converged"
MAX_ITERS = "MaxIters"
SINGULAR_HESSIAN = "SingularHessian"
DOMAIN_FAILURE = "DomainFailure"

# exceptions that mean "this trial point is unusable, back off"; the
# metric errors cover points so extreme the Fisher matrix degenerates
# numerically even though it is positive definite in exact arithmetic
_POINT_ERRORS = (
    DomainViolation,
    DivergenceUndefined,
    NonFiniteValue,
    NotPositiveDefinite,
    QuadratureUnderflow,
    SingularMatrix,
)

_MAX_HALVINGS = 30


@dataclass(frozen=True)
class StopRule:
    grad_tol: float = 1e-6
    max_iters: int = 10000

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")


@dataclass
class AdamState:
    """Bias-corrected Adam moments plus hyperparameters."""

    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: np.ndarray | None = None
    v: np.ndarray | None = None
    t: int = 0

    def step(self, grad):
        """Advance the moments and return the raw update direction."""
        grad = np.asarray(grad, dtype=float)
        if self.m is None:
            self.m = np.zeros_like(grad)
            self.v = np.zeros_like(grad)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return -self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class OptimizerTrace:
    """Per-step records plus the retained iterate path."""

    status: str = MAX_ITERS
    iters: list = field(default_factory=list)
    f_values: list = field(default_factory=list)
    grad_l2: list = field(default_factory=list)
    grad_gnorm: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    spd_flags: list = field(default_factory=list)
    times: list = field(default_factory=list)
    iterates: list = field(default_factory=list)

    @property
    def n_iterations(self):
        return len(self.iters)

    def record(self, it, f, l2, gnorm, step_norm, spd, elapsed):
        if self.iters and it <= self.iters[-1]:
            raise ValueError("iteration numbers must increase strictly")
        if self.times and elapsed < self.times[-1]:
            raise ValueError("times must be nondecreasing")
        self.iters.append(int(it))
        self.f_values.append(float(f))
        self.grad_l2.append(float(l2))
        self.grad_gnorm.append(float(gnorm))
        self.step_norms.append(float(step_norm))
        self.spd_flags.append(bool(spd))
        self.times.append(float(elapsed))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["iter", "f", "grad_l2", "grad_gnorm", "step_norm", "spd", "time_s"]
            )
            for row in zip(
                self.iters,
                self.f_values,
                self.grad_l2,
                self.grad_gnorm,
                self.step_norms,
                self.spd_flags,
                self.times,
            ):
                it, f, l2, gn, sn, spd, t = row
                writer.writerow(
                    [it, repr(f), repr(l2), repr(gn), repr(sn), int(spd), repr(t)]
                )

    def summary(self):
        return {
            "status": self.status,
            "iterations": self.n_iterations,
            "final_f": self.f_values[-1] if self.f_values else None,
            "final_grad_l2": self.grad_l2[-1] if self.grad_l2 else None,
            "total_time_s": self.times[-1] if self.times else 0.0,
            "mean_iter_time_s": (
                self.times[-1] / self.n_iterations if self.n_iterations else None
            ),
        }


def _f_noise(f0):
    """Absolute rounding noise of one objective evaluation near value f0."""
    return 32.0 * EPS * (1.0 + abs(f0))


def _norms(structure, xi, eucl_grad):
    """(a, l2, g-norm) of the Riemannian gradient coordinates."""
    G = structure.metric(xi)
    a = solve_spd(G, eucl_grad)
    return a, float(np.linalg.norm(a)), float(np.sqrt(max(a @ G @ a, 0.0)))


def _finite_value(obj, xi):
    """Objective value, or None when the point is unusable."""
    try:
        f = float(obj.value(xi))
    except _POINT_ERRORS:
        return None
    return f if np.isfinite(f) else None


def _evaluate(structure, obj, xi):
    """(f, grad, a, l2, gnorm) at xi, or None when the point is unusable."""
    if not structure.contains(xi):
        return None
    try:
        f = float(obj.value(xi))
        grad = np.asarray(obj.eucl_grad(xi), dtype=float)
        a, l2, gnorm = _norms(structure, xi, grad)
    except _POINT_ERRORS:
        return None
    if not (np.isfinite(f) and np.all(np.isfinite(grad)) and np.isfinite(l2)):
        return None
    return f, grad, a, l2, gnorm


def dual_newton_run(structure, obj, xi0, stop=None, damped=False):
    """Newton iteration on the dual Hessian with quadratic retraction.

    Unit steps by default.  A step whose retraction (or objective value)
    leaves the domain is halved up to 30 times; the optional damped mode
    runs a Wolfe search along the retraction curve whenever the descent
    certificate holds.
    """
    stop = stop or StopRule()
    xi = np.array(xi0, dtype=float)
    if not structure.contains(xi):
        raise DomainViolation(f"starting point {xi} outside the model domain")
    jac = getattr(obj, "grad_field_jacobian", None)
    field_fn = gradient_field(structure, obj.eucl_grad)
    trace = OptimizerTrace()
    trace.iterates.append(xi.copy())
    start = time.perf_counter()

    grad = np.asarray(obj.eucl_grad(xi), dtype=float)
    a, l2, _ = _norms(structure, xi, grad)
    if l2 < stop.grad_tol:
        trace.status = CONVERGED
        return trace

    for it in range(1, stop.max_iters + 1):
        try:
            hess = dual_hessian_matrix(structure, field_fn, xi, jacobian=jac)
            beta, spd = newton_direction(structure, hess, grad, xi)
        except (SingularMatrix, NotPositiveDefinite, NonFiniteValue):
            trace.status = SINGULAR_HESSIAN
            return trace
        except (DomainViolation, DivergenceUndefined, QuadratureUnderflow):
            # finite-difference probes crossed the domain boundary, so
            # no local model exists at this iterate
            trace.status = DOMAIN_FAILURE
            return trace

        if damped and spd:
            beta = _damped_newton_step(structure, obj, xi, beta)

        new_xi = evaluation = None
        trial = beta
        for _ in range(_MAX_HALVINGS + 1):
            try:
                candidate = second_order_retract(structure, xi, trial)
            except DomainViolation:
                trial = 0.5 * trial
                continue
            evaluation = _evaluate(structure, obj, candidate)
            if evaluation is None:
                trial = 0.5 * trial
                continue
            new_xi = candidate
            break
        if new_xi is None:
            trace.status = DOMAIN_FAILURE
            return trace

        f_new, grad, a, l2, gnorm = evaluation
        trace.record(
            it,
            f_new,
            l2,
            gnorm,
            float(np.linalg.norm(new_xi - xi)),
            spd,
            time.perf_counter() - start,
        )
        xi = new_xi
        trace.iterates.append(xi.copy())
        if l2 < stop.grad_tol:
            trace.status = CONVERGED
            return trace

    trace.status = MAX_ITERS
    return trace


def _damped_newton_step(structure, obj, xi, beta):
    """Scale beta by a Wolfe step length along the retraction curve."""
    gamma = structure.gamma(xi)
    curve_quad = np.einsum("jki,j,k->i", gamma, beta, beta)

    def point(s):
        return xi + s * beta - 0.5 * s * s * curve_quad

    def phi(s):
        p = point(s)
        if not structure.contains(p):
            return np.inf
        f = _finite_value(obj, p)
        return np.inf if f is None else f

    def dphi(s):
        velocity = beta - s * curve_quad
        return float(np.asarray(obj.eucl_grad(point(s))) @ velocity)

    f_atol = _f_noise(phi(0.0))
    if abs(dphi(0.0)) <= f_atol:
        # decrease not resolvable in the value; keep the full step
        return beta
    try:
        s = wolfe_line_search(phi, dphi, 1.0, f_atol=f_atol)
    except LineSearchFailure:
        return beta
    return s * beta


def natural_gradient_run(structure, obj, xi0, stop=None):
    """Steepest descent in the metric with a strong Wolfe step length."""
    stop = stop or StopRule()
    xi = np.array(xi0, dtype=float)
    if not structure.contains(xi):
        raise DomainViolation(f"starting point {xi} outside the model domain")
    trace = OptimizerTrace()
    trace.iterates.append(xi.copy())
    start = time.perf_counter()

    grad = np.asarray(obj.eucl_grad(xi), dtype=float)
    a, l2, _ = _norms(structure, xi, grad)
    if l2 < stop.grad_tol:
        trace.status = CONVERGED
        return trace

    last_s = None
    for it in range(1, stop.max_iters + 1):
        direction = -a
        f0 = float(obj.value(xi))

        def phi(s, xi=xi, direction=direction, f0=f0):
            if s == 0.0:
                return f0
            p = xi + s * direction
            if not structure.contains(p):
                return np.inf
            f = _finite_value(obj, p)
            return np.inf if f is None else f

        def dphi(s, xi=xi, direction=direction, grad=grad):
            if s == 0.0:
                return float(grad @ direction)
            return float(np.asarray(obj.eucl_grad(xi + s * direction)) @ direction)

        f_atol = _f_noise(f0)
        sub_noise = abs(float(grad @ direction)) <= f_atol
        if sub_noise:
            # slope below the value resolution: a line search cannot
            # certify progress, so continue at the last working scale
            s = last_s if last_s is not None else 1.0
        else:
            try:
                s = wolfe_line_search(phi, dphi, 1.0, f_atol=f_atol)
            except LineSearchFailure:
                trace.status = DOMAIN_FAILURE
                return trace

        new_xi = evaluation = None
        for _ in range(_MAX_HALVINGS + 1):
            candidate = xi + s * direction
            evaluation = _evaluate(structure, obj, candidate)
            if evaluation is not None and (
                not sub_noise or evaluation[0] <= f0 + f_atol
            ):
                new_xi = candidate
                break
            s *= 0.5
        if new_xi is None:
            trace.status = DOMAIN_FAILURE
            return trace
        last_s = s

        f_new, grad, a, l2, gnorm = evaluation
        trace.record(
            it,
            f_new,
            l2,
            gnorm,
            float(np.linalg.norm(new_xi - xi)),
            True,
            time.perf_counter() - start,
        )
        xi = new_xi
        trace.iterates.append(xi.copy())
        if l2 < stop.grad_tol:
            trace.status = CONVERGED
            return trace

    trace.status = MAX_ITERS
    return trace


def wolfe_line_search(phi, dphi, s0=1.0, c1=1e-4, c2=0.9, max_evals=60, f_atol=0.0):
    """Strong Wolfe step by bracketing and bisection zoom.

    ``phi`` and ``dphi`` evaluate the line restriction and its
    derivative; ``dphi(0)`` must be negative.  Non-finite trial values
    are treated as overshoots and bracket the step from above.

    ``f_atol`` is the rounding noise of one phi evaluation.  Near a
    minimizer of a large-magnitude objective the true decrease can sit
    below that noise; the value comparisons then carry this allowance
    and the zoom is steered by the derivative alone, which is still
    computed accurately.
    """
    phi0 = float(phi(0.0))
    dphi0 = float(dphi(0.0))
    if not dphi0 < 0:
        raise ValueError(f"line derivative at 0 must be negative, got {dphi0}")

    evals = 0

    def take(s):
        nonlocal evals
        evals += 1
        if evals > max_evals:
            raise LineSearchFailure(f"no Wolfe point within {max_evals} evaluations")
        return float(phi(s))

    def zoom(lo, f_lo, hi):
        # invariant: lo satisfies Armijo, the Wolfe point lies between.
        # a trial only shrinks toward lo on value grounds when it is
        # resolvably worse than the start too; otherwise noise-level
        # fluctuations would steer the interval instead of the slope.
        while True:
            if abs(hi - lo) <= EPS * (1.0 + abs(lo)):
                raise LineSearchFailure(
                    f"zoom interval degenerated at s={lo} without a Wolfe point"
                )
            s = 0.5 * (lo + hi)
            fs = take(s)
            if not np.isfinite(fs) or fs > phi0 + c1 * s * dphi0 + f_atol or (
                fs >= f_lo + f_atol and fs > phi0 + f_atol
            ):
                hi = s
                continue
            ds = float(dphi(s))
            if abs(ds) <= -c2 * dphi0:
                return s
            if ds * (hi - lo) >= 0:
                hi = lo
            lo, f_lo = s, fs

    prev_s, prev_f = 0.0, phi0
    s = float(s0)
    first = True
    while True:
        fs = take(s)
        if not np.isfinite(fs) or fs > phi0 + c1 * s * dphi0 + f_atol or (
            not first and fs >= prev_f + f_atol and fs > phi0 + f_atol
        ):
            return zoom(prev_s, prev_f, s)
        ds = float(dphi(s))
        if abs(ds) <= -c2 * dphi0:
            return s
        if ds >= 0:
            return zoom(s, fs, prev_s)
        prev_s, prev_f = s, fs
        s *= 2.0
        first = False


def mirror_step(index, obj, theta, s):
    """One moment-coordinate descent step of length s.

    Subtracts s times the natural-parameter gradient from the moment
    coordinates and maps back through the Legendre inverse.
    """
    eta = loglinear.moments(index, theta)
    grad = np.asarray(obj.eucl_grad(theta), dtype=float)
    return loglinear.moment_to_natural(index, eta - s * grad, theta0=theta)


def mirror_descent_run(index, obj, theta0, stop=None):
    """Bregman proximal descent for the log-linear family.

    The step is taken in moment coordinates (where it is plain
    subtraction) and pulled back through the Legendre inverse; the step
    length comes from a Wolfe search on that pullback.  Infeasible
    moment vectors show up as failed inversions and shrink the step.
    """
    stop = stop or StopRule()
    theta = np.array(theta0, dtype=float)
    structure = loglinear.dual_structure(index, 0.0)
    trace = OptimizerTrace()
    trace.iterates.append(theta.copy())
    start = time.perf_counter()

    grad = np.asarray(obj.eucl_grad(theta), dtype=float)
    a, l2, _ = _norms(structure, theta, grad)
    if l2 < stop.grad_tol:
        trace.status = CONVERGED
        return trace

    last_s = None
    for it in range(1, stop.max_iters + 1):
        eta = loglinear.moments(index, theta)
        direction = -grad
        f0 = float(obj.value(theta))
        cache = {}

        def pullback(s, theta=theta, eta=eta, direction=direction, cache=cache):
            try:
                cand = loglinear.moment_to_natural(
                    index, eta + s * direction, theta0=theta
                )
            except MomentInfeasible:
                return None
            cache[s] = cand
            return cand

        def phi(s, f0=f0, cache=cache):
            if s == 0.0:
                return f0
            cand = cache.get(s)
            if cand is None:
                cand = pullback(s)
            if cand is None:
                return np.inf
            f = _finite_value(obj, cand)
            return np.inf if f is None else f

        def dphi(s, theta=theta, direction=direction, grad=grad, cache=cache):
            if s == 0.0:
                # d theta/d eta = G^{-1}, so the pullback slope is
                # -grad^T G^{-1} grad
                return float(
                    grad @ solve_spd(loglinear.fisher_metric(index, theta), direction)
                )
            cand = cache.get(s)
            if cand is None:
                cand = pullback(s)
            if cand is None:
                return np.inf
            g = np.asarray(obj.eucl_grad(cand), dtype=float)
            return float(
                g @ solve_spd(loglinear.fisher_metric(index, cand), direction)
            )

        f_atol = _f_noise(f0)
        sub_noise = abs(float(dphi(0.0))) <= f_atol
        if sub_noise:
            s = last_s if last_s is not None else 1.0
        else:
            try:
                s = wolfe_line_search(phi, dphi, 1.0, f_atol=f_atol)
            except LineSearchFailure:
                trace.status = DOMAIN_FAILURE
                return trace

        new_theta = evaluation = None
        for _ in range(_MAX_HALVINGS + 1):
            candidate = cache.get(s)
            if candidate is None:
                candidate = pullback(s)
            if candidate is not None:
                evaluation = _evaluate(structure, obj, candidate)
                if evaluation is not None and (
                    not sub_noise or evaluation[0] <= f0 + f_atol
                ):
                    new_theta = candidate
                    break
            s *= 0.5
        if new_theta is None:
            trace.status = DOMAIN_FAILURE
            return trace
        last_s = s

        f_new, grad, a, l2, gnorm = evaluation
        trace.record(
            it,
            f_new,
            l2,
            gnorm,
            float(np.linalg.norm(new_theta - theta)),
            True,
            time.perf_counter() - start,
        )
        theta = new_theta
        trace.iterates.append(theta.copy())
        if l2 < stop.grad_tol:
            trace.status = CONVERGED
            return trace

    trace.status = MAX_ITERS
    return trace


def adam_run(structure, obj, xi0, stop=None, hyper=None):
    """Euclidean Adam baseline.

    The update is plain bias-corrected Adam on the coordinate gradient;
    only the stopping test uses the metric, so convergence is declared
    by the same norm as the other methods.  Steps leaving the domain
    are halved back toward the current point.
    """
    stop = stop or StopRule()
    state = hyper or AdamState()
    xi = np.array(xi0, dtype=float)
    if not structure.contains(xi):
        raise DomainViolation(f"starting point {xi} outside the model domain")
    trace = OptimizerTrace()
    trace.iterates.append(xi.copy())
    start = time.perf_counter()

    grad = np.asarray(obj.eucl_grad(xi), dtype=float)
    a, l2, _ = _norms(structure, xi, grad)
    if l2 < stop.grad_tol:
        trace.status = CONVERGED
        return trace

    for it in range(1, stop.max_iters + 1):
        delta = state.step(grad)
        new_xi = evaluation = None
        trial = delta
        for _ in range(_MAX_HALVINGS + 1):
            candidate = xi + trial
            evaluation = _evaluate(structure, obj, candidate)
            if evaluation is not None:
                new_xi = candidate
                break
            trial = 0.5 * trial
        if new_xi is None:
            trace.status = DOMAIN_FAILURE
            return trace

        f_new, grad, a, l2, gnorm = evaluation
        trace.record(
            it,
            f_new,
            l2,
            gnorm,
            float(np.linalg.norm(new_xi - xi)),
            True,
            time.perf_counter() - start,
        )
        xi = new_xi
        trace.iterates.append(xi.copy())
        if l2 < stop.grad_tol:
            trace.status = CONVERGED
            return trace

    trace.status = MAX_ITERS
    return trace


_MAX_RATIO = 0.9


def convergence_order(trace, xi_final):
    """Mean empirical convergence order of a trace's iterate path.

    Uses q_k = log(e_{k+1}/e_k) / log(e_k/e_{k-1}) over triples of
    consecutive errors e_k = ||xi_k - xi_final||.  A triple is usable
    when all three errors sit above 100 machine epsilons, the first
    step (whose length reflects the starting point, not the local map)
    is not involved, and both legs contract by at least ten percent so
    the log ratios carry information rather than plateau noise.

    xi_final is the reference optimum; passing a point converged beyond
    the trace's own tolerance makes the last recorded steps measurable.
    """
    xi_final = np.asarray(xi_final, dtype=float)
    iterates = [np.asarray(p, dtype=float) for p in trace.iterates]
    if len(iterates) < 4:
        raise InsufficientIterations(
            f"need at least 3 iterations, trace has {len(iterates) - 1}"
        )
    errors = np.array([np.linalg.norm(p - xi_final) for p in iterates])
    floor = 100.0 * EPS
    orders = []
    for k in range(2, len(errors) - 1):
        e_prev, e_k, e_next = errors[k - 1], errors[k], errors[k + 1]
        if min(e_prev, e_k, e_next) <= floor:
            continue
        if e_k > _MAX_RATIO * e_prev or e_next > _MAX_RATIO * e_k:
            continue
        orders.append(np.log(e_next / e_k) / np.log(e_k / e_prev))
    if not orders:
        raise InsufficientIterations("no usable error triples above the noise floor")
    return float(np.mean(orders))
