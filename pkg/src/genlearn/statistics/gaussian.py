import numpy as np
from scipy.linalg import solve_triangular

from genlearn.numcore.linalg import cholesky_lower

LOG_2PI = np.log(2 * np.pi)


def mvn_logpdf(X: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """
    Log-density (nats) of a multivariate normal at every row of X, through the Cholesky factor
    of the covariance.

    Parameters
    ----------
    X: np.ndarray
        Points, one per row (a single vector is also accepted)
    mean: np.ndarray
        The mean vector
    cov: np.ndarray
        The covariance matrix (symmetric positive definite)
    """
    X = np.atleast_2d(X)
    L = cholesky_lower(cov)
    diff = (X - mean).T
    sol = solve_triangular(L, diff, lower=True)
    maha = np.sum(sol ** 2, axis=0)
    log_det = 2 * np.sum(np.log(np.diag(L)))
    return -0.5 * (maha + log_det + X.shape[1] * LOG_2PI)


def isotropic_logpdf(X: np.ndarray, mean: np.ndarray, variance: float) -> np.ndarray:
    """
    Log-density (nats) of N(mean, variance * I) at every row of X.
    """
    X = np.atleast_2d(X)
    dim = X.shape[1]
    sq = np.sum((X - mean) ** 2, axis=1)
    return -0.5 * (sq / variance + dim * (LOG_2PI + np.log(variance)))
