import numpy as np


def euclidean_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Computes the Euclidean distances between a given vector x and all vectors in an
    array of vectors y. Returns a 1-dimensional vector containing the computed distances.
    Euclidean distance: sqrt(SUM[(pi - qi)^2])

    Parameters
    ----------
    x: np.ndarray
        An array consisting of one row
    y: np.ndarray
        An array containing one or multiple rows
    """
    return np.sqrt(np.square(np.atleast_2d(y) - x).sum(axis=1))


def squared_distances(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """
    Returns the (n, k) matrix of squared Euclidean distances between the rows of X and the rows
    of 'centers'.
    """
    X = np.atleast_2d(X)
    centers = np.atleast_2d(centers)
    return np.stack([euclidean_distance(c, X) ** 2 for c in centers], axis=1)
