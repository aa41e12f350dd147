import numpy as np
import pytest

from toda_ward_lab.simulation.gaussian_field import (
    CovarianceOperator, PointCloud, green, green_matrix, green_regularized, plus_norm,
    regularized_variance, root_pairings_to_coords, sample_field,
)
from toda_ward_lab.symbolic.algebra import CARTAN
from toda_ward_lab.utils.errors import ConfigError, NumericError


def test_plus_norm():
    assert np.allclose(plus_norm(np.array([0.2, -3.0, 1j])), [1.0, 3.0, 1.0])


def test_green_is_symmetric_and_matches_matrix():
    x, y = 0.3 + 0.7j, -1.2 + 2.0j
    assert green(x, y) == pytest.approx(green(y, x))
    matrix = green_matrix(np.array([x]), np.array([y, 0.5]))
    assert matrix[0, 0] == pytest.approx(green(x, y))
    assert matrix[0, 1] == pytest.approx(green(x, 0.5))


def test_green_on_the_boundary_doubles():
    # both distances agree for real points
    assert green(0.2, -0.3) == pytest.approx(-2 * np.log(0.5))


def test_green_rejects_coincident_points():
    with pytest.raises(NumericError):
        green(0.5j, 0.5j)
    with pytest.raises(NumericError):
        green_matrix(np.array([1.0]), np.array([1.0]))


def test_regularized_kernel_diagonal():
    points = np.array([0.1 + 0.02j, 2.5 + 1.0j, -0.7])
    kernel = green_regularized(points, points, 0.05)
    assert np.allclose(np.diag(kernel), regularized_variance(points, 0.05))
    assert np.allclose(kernel, kernel.T)
    with pytest.raises(ConfigError):
        green_regularized(points, points, 0.0)


def test_regularized_kernel_agrees_away_from_the_diagonal():
    xs = np.array([0.3 + 1.0j])
    ys = np.array([-1.0 + 0.5j, 2.0])
    assert np.allclose(green_regularized(xs, ys, 1e-3), green_matrix(xs, ys))


def test_point_cloud_exclusions():
    cloud = PointCloud.build([0.0 + 1.0j], [-1.0, 1.0], grid=(16, 8), n_boundary=32,
                             delta=0.05, epsilon=0.4, radius=4.0)
    assert np.all(np.abs(cloud.bulk - 1.0j) >= 0.4)
    assert np.all(cloud.bulk.imag >= 0.05)
    assert np.all(np.abs(np.abs(cloud.boundary) - 1.0) >= 0.4 - 1e-12)
    assert cloud.bulk_weights.sum() < 8.0 * (4.0 - 0.05)
    # arcs: (-inf, -1) u (1, inf) -> 0, (-1, 1) -> 1
    middle = np.abs(cloud.boundary) < 1.0
    assert np.all(cloud.boundary_arcs[middle] == 1)
    assert np.all(cloud.boundary_arcs[~middle] == 0)
    assert cloud.size == cloud.n_bulk + cloud.n_boundary


def test_point_cloud_extra_and_mapping():
    cloud = PointCloud.build([], [], grid=(4, 2), n_boundary=8)
    extended = cloud.with_extra([0.5, 0.7])
    assert extended.size == cloud.size + 2
    shifted = cloud.mapped(lambda z: z + 1.0, lambda z: np.ones_like(z))
    assert np.allclose(shifted.bulk, cloud.bulk + 1.0)
    assert np.allclose(shifted.bulk_weights, cloud.bulk_weights)
    scaled = cloud.mapped(lambda z: 2.0 * z, lambda z: 2.0 * np.ones_like(z))
    assert np.allclose(scaled.bulk_weights, 4 * cloud.bulk_weights)
    assert np.allclose(scaled.boundary_weights, 2 * cloud.boundary_weights)


def test_mapping_to_infinity_is_an_error():
    cloud = PointCloud.build([], [], grid=(4, 2), n_boundary=8)
    target = cloud.boundary[0]
    with pytest.raises(NumericError):
        cloud.mapped(lambda z: 1.0 / (z - target), lambda z: -1.0 / (z - target) ** 2)


def test_factorization_and_jitter():
    points = np.array([0.1 + 0.5j, 0.4 + 0.5j, -0.3 + 1.5j, 0.0, 1.0])
    cov = CovarianceOperator.from_points(points, 0.05)
    assert cov.size == 5
    assert np.allclose(cov.factor @ cov.factor.T, cov.matrix + cov.jitter * np.eye(5))
    with pytest.raises(NumericError):
        CovarianceOperator.factorize(-np.eye(3))


def test_sampled_field_covariance():
    points = np.array([0.2 + 0.6j, -0.5 + 1.1j, 0.7])
    cloud = PointCloud(bulk=points[:2], bulk_weights=np.ones(2), boundary=points[2:].real,
                       boundary_weights=np.ones(1), boundary_arcs=np.zeros(1, dtype=int))
    cov = CovarianceOperator.from_points(cloud.points, 0.05)
    draws = sample_field(cloud, cov, seed=11, draws=40000)
    assert draws.shape == (40000, 3, 2)
    empirical = np.einsum("dni,dmj->nimj", draws, draws) / draws.shape[0]
    expected = np.einsum("ij,nm->nimj", CARTAN, cov.matrix)
    assert np.allclose(empirical, expected, atol=0.08 * np.max(np.abs(expected)))


def test_sampling_is_reproducible():
    cloud = PointCloud.build([], [], grid=(4, 2), n_boundary=8)
    cov = CovarianceOperator.from_points(cloud.points, 0.05)
    first = sample_field(cloud, cov, seed=5)
    assert first.shape == (cloud.size, 2)
    assert np.array_equal(first, sample_field(cloud, cov, seed=5))
    with pytest.raises(ConfigError):
        sample_field(cloud.with_extra([0.5]), cov, seed=5)


def test_root_coordinates():
    pairings = np.array([[2.0, -1.0], [-1.0, 2.0]])
    assert np.allclose(root_pairings_to_coords(pairings), np.eye(2))
