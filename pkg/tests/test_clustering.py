import numpy as np
import pytest

from genlearn.clustering.seeding import kmeans_plusplus, kmeans_plusplus_centers
from genlearn.numcore.rng import Rng
from genlearn.statistics.distances import euclidean_distance, squared_distances
from genlearn.utils.exceptions import InvalidArgumentError


def _three_blobs(seed):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [100.0, 0.0], [0.0, 100.0]])
    return np.vstack([c + 0.01 * rng.normal(size=(30, 2)) for c in centers])


def test_euclidean_distance():
    assert np.allclose(euclidean_distance(np.zeros(2), np.array([[3.0, 4.0], [0.0, 1.0]])), [5.0, 1.0])


def test_squared_distances_shape():
    X = np.arange(12.0).reshape(6, 2)
    D = squared_distances(X, X[:2])
    assert D.shape == (6, 2) and D[0, 0] == 0.0 and D[1, 0] == 8.0


def test_seeds_land_in_distinct_blobs():
    X = _three_blobs(0)
    for seed in range(10):
        idx = kmeans_plusplus(X, 3, Rng(seed))
        assert sorted(idx // 30) == [0, 1, 2]


def test_seeding_is_deterministic():
    X = _three_blobs(1)
    assert np.array_equal(kmeans_plusplus_centers(X, 2, Rng(5)), kmeans_plusplus_centers(X, 2, Rng(5)))


def test_identical_points_still_give_k_seeds():
    assert kmeans_plusplus(np.ones((5, 2)), 3, Rng(0)).size == 3


def test_too_many_centers():
    with pytest.raises(InvalidArgumentError):
        kmeans_plusplus(np.zeros((3, 2)), 4, Rng(0))
