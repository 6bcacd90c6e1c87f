import numpy as np

from genlearn.numcore.rng import Rng
from genlearn.statistics.distances import squared_distances
from genlearn.utils.exceptions import InvalidArgumentError


def kmeans_plusplus(X: np.ndarray, k: int, rng: Rng) -> np.ndarray:
    """
    k-means++ seeding: the first center is a uniformly drawn data point, every next one is drawn
    with probability proportional to its squared distance to the nearest center chosen so far.
    Returns the indices of the k chosen rows.

    Parameters
    ----------
    X: np.ndarray
        The data (n, M)
    k: int
        The number of centers (1 <= k <= n)
    rng: Rng
        The random number generator (its state advances)
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"The value of 'k' must be in [1, {n}].")
    chosen = [int(rng.integers(n))]
    closest = squared_distances(X, X[chosen[0]])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        # all points coincide with a center: fall back to a uniform draw
        weights = closest if total > 0 else np.ones(n)
        idx = rng.categorical(weights / weights.sum())
        chosen.append(idx)
        closest = np.minimum(closest, squared_distances(X, X[idx])[:, 0])
    return np.array(chosen, dtype=int)


def kmeans_plusplus_centers(X: np.ndarray, k: int, rng: Rng) -> np.ndarray:
    """
    Returns the (k, M) matrix of k-means++ seed points.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return X[kmeans_plusplus(X, k, rng)].copy()
