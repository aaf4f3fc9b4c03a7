import numpy as np
import pytest
from numpy.testing import assert_allclose

from dualnewton.errors import DomainViolation
from dualnewton.models import gaussian


def test_fisher_values():
    assert_allclose(gaussian.fisher_metric([0.0, 1.0]), np.diag([2.0, 4.0]))
    assert_allclose(gaussian.fisher_metric([5.0, 2.0]), np.diag([0.5, 1.0]))


def test_fisher_mu_independent():
    assert_allclose(
        gaussian.fisher_metric([-3.0, 0.7]), gaussian.fisher_metric([9.0, 0.7])
    )


def test_fisher_domain():
    with pytest.raises(DomainViolation):
        gaussian.fisher_metric([0.0, 0.0])
    with pytest.raises(DomainViolation):
        gaussian.fisher_metric([0.0, -1.0])


def test_christoffel_levi_civita_values():
    # alpha = 0 at sigma = 1: mixed mu symbol -1, sigma symbols (1/2, -1)
    gamma = gaussian.christoffel([0.3, 1.0], 0.0)
    plane_mu = np.array([[0.0, -1.0], [-1.0, 0.0]])
    plane_sigma = np.array([[0.5, 0.0], [0.0, -1.0]])
    assert_allclose(gamma[:, :, 0], plane_mu)
    assert_allclose(gamma[:, :, 1], plane_sigma)


def test_christoffel_mixture_connection_values():
    # alpha = -1 kills the mixed symbol and flips the sigma ones
    gamma = gaussian.christoffel([0.0, 1.0], -1.0)
    assert_allclose(gamma[:, :, 0], np.zeros((2, 2)))
    assert_allclose(gamma[:, :, 1], np.eye(2))


def test_christoffel_scaling_in_sigma():
    g1 = gaussian.christoffel([0.0, 1.0], 0.4)
    g2 = gaussian.christoffel([0.0, 2.0], 0.4)
    assert_allclose(g2, g1 / 2.0)


def test_christoffel_symmetric_lower_indices():
    for alpha in (-1.0, -0.3, 0.0, 0.7, 1.0):
        gamma = gaussian.christoffel([1.0, 0.5], alpha)
        assert_allclose(gamma, np.transpose(gamma, (1, 0, 2)))


def test_dual_structure_pairs_alphas():
    ds = gaussian.dual_structure(0.6)
    xi = np.array([0.2, 1.4])
    assert_allclose(ds.gamma(xi), gaussian.christoffel(xi, 0.6))
    assert_allclose(ds.gamma_dual(xi), gaussian.christoffel(xi, -0.6))
    assert ds.contains(xi)
    assert not ds.contains(np.array([0.2, -1.4]))


def test_log_density_normalizes():
    # coarse grid integration of the density over a wide box
    xi = np.array([0.5, 0.8])
    grid = np.linspace(-6, 7, 401)
    xx, yy = np.meshgrid(grid, grid)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    dens = np.exp(gaussian.log_density(pts, xi))
    h = grid[1] - grid[0]
    assert abs(dens.sum() * h * h - 1.0) < 1e-6
