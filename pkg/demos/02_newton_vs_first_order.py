"""Second-order vs first-order on a regularized projection problem.

Projects a randomly drawn 4-variable distribution onto the Boltzmann
family with a quadratic penalty, then races the dual Newton method (at
several connection parameters) against natural gradient, mirror
descent, and Adam.  The point of the exercise: the Newton iteration
count is flat across the connection family and an order of magnitude
below every baseline.
"""

import numpy as np

from dualnewton import (
    StopRule,
    adam_run,
    dual_newton_run,
    mirror_descent_run,
    natural_gradient_run,
)
from dualnewton.experiments import gen_target
from dualnewton.models import loglinear
from dualnewton.models.loglinear import SubsetIndex
from dualnewton.objectives import KLProjectionObjective

target = gen_target(4, base_scale=1.0, seed=0)
index = SubsetIndex.boltzmann(4)
eta_hat = target.moments_for(index)
obj = KLProjectionObjective(index, eta_hat, 0.5, 0.5)

theta0 = np.random.default_rng([0, 1]).uniform(-0.25, 0.2, len(index))
stop = StopRule(grad_tol=1e-6)

print(f"{'method':22s} {'iterations':>10s} {'final grad':>12s}")
for alpha in (-1.0, -0.5, 0.0, 0.5, 1.0):
    ds = loglinear.dual_structure(index, alpha)
    tr = dual_newton_run(ds, obj, theta0, stop)
    print(
        f"newton alpha={alpha:+.1f}     {tr.n_iterations:10d} "
        f"{tr.grad_l2[-1]:12.2e}   {tr.status}"
    )

ds0 = loglinear.dual_structure(index, 0.0)
for name, runner in (
    ("natural gradient", lambda: natural_gradient_run(ds0, obj, theta0, stop)),
    ("mirror descent", lambda: mirror_descent_run(index, obj, theta0, stop)),
    ("adam", lambda: adam_run(ds0, obj, theta0, stop)),
):
    tr = runner()
    print(f"{name:22s} {tr.n_iterations:10d} {tr.grad_l2[-1]:12.2e}   {tr.status}")

print(
    "\nEvery method stops at the same gradient norm; only the second-order "
    "steps exploit the curvature of the divergence."
)
