"""
Gaussian mixtures f(x) = SUM_j pi_j N(x; mu_j, Sigma_j). Every density is evaluated in log-space
through Cholesky factors; posteriors over components are normalized with max-subtraction.
"""
from typing import Tuple, Union

import numpy as np

from genlearn.divergence.pmf import PMF_TOL, Pmf
from genlearn.numcore.linalg import cholesky_lower
from genlearn.numcore.rng import Rng
from genlearn.statistics.gaussian import mvn_logpdf
from genlearn.statistics.sigmoid_function import log_sum_exp
from genlearn.utils.exceptions import InvalidArgumentError, InvalidModelError


class GmmParams:

    """
    Parameters {(pi_j, mu_j, Sigma_j)} of a mixture of d Gaussians in M dimensions.
    """

    def __init__(self, weights: np.ndarray, means: np.ndarray, covs: np.ndarray):
        """
        Parameters of a Gaussian mixture.

        Parameters
        ----------
        weights: np.ndarray
            The mixing weights (d,), a pmf
        means: np.ndarray
            The component means (d, M)
        covs: np.ndarray
            The component covariances (d, M, M), each symmetric positive definite

        Attributes
        ----------
        cholesky: np.ndarray
            The lower Cholesky factors of the covariances (d, M, M)
        """
        weights = np.asarray(weights, dtype=float).ravel()
        means = np.asarray(means, dtype=float)
        if means.ndim == 1:
            means = means[:, None]
        covs = np.asarray(covs, dtype=float)
        if covs.ndim == 1:
            covs = covs[:, None, None]
        self._check_init(weights, means, covs)
        self.weights = weights
        self.means = means
        self.covs = covs
        self.cholesky = np.array([cholesky_lower(c) for c in covs])

    @staticmethod
    def _check_init(weights: np.ndarray, means: np.ndarray, covs: np.ndarray):
        d = weights.size
        if d == 0 or np.any(weights < 0) or abs(weights.sum() - 1.0) > PMF_TOL:
            raise InvalidModelError("The value of 'weights' must be a pmf (sum 1 within 1e-12).")
        if means.shape[0] != d or covs.shape != (d, means.shape[1], means.shape[1]):
            raise InvalidModelError(f"Expected means (d, M) and covs (d, M, M) with d={d}.")
        if np.any(np.abs(covs - covs.transpose(0, 2, 1)) > 1e-10 * max(1.0, np.abs(covs).max())):
            raise InvalidModelError("Every covariance must be symmetric.")

    @property
    def d(self) -> int:
        return self.weights.size

    @property
    def M(self) -> int:
        return self.means.shape[1]

    def to_dict(self) -> dict:
        return {"components": self.d,
                "weights": self.weights.tolist(),
                "means": self.means.tolist(),
                "covs": self.covs.tolist()}

    @classmethod
    def from_dict(cls, record: dict) -> "GmmParams":
        return cls(np.array(record["weights"]), np.array(record["means"]), np.array(record["covs"]))

    def __repr__(self) -> str:
        return f"GmmParams(d={self.d}, M={self.M}, weights={np.round(self.weights, 4).tolist()})"


def _points(g: GmmParams, x: np.ndarray) -> np.ndarray:
    X = np.asarray(x, dtype=float)
    if X.ndim <= 1 and X.size % g.M == 0:
        # a single point, or n scalars when M = 1
        X = X.reshape(-1, g.M)
    if X.ndim != 2 or X.shape[1] != g.M:
        raise InvalidArgumentError(f"The points must have {g.M} coordinate(s).")
    return X


def component_log_joint(g: GmmParams, X: np.ndarray) -> np.ndarray:
    """
    Returns the (n, d) matrix of log pi_j + log N(x_i; mu_j, Sigma_j).
    """
    X = _points(g, X)
    with np.errstate(divide="ignore"):
        log_w = np.log(g.weights)
    return np.stack([log_w[j] + mvn_logpdf(X, g.means[j], g.covs[j]) for j in range(g.d)], axis=1)


def gmm_logpdf(g: GmmParams, x: np.ndarray) -> np.ndarray:
    """
    Returns log f(x_i) (nats) for every point.
    """
    return log_sum_exp(component_log_joint(g, x), axis=1)


def gmm_pdf(g: GmmParams, x: np.ndarray) -> Union[float, np.ndarray]:
    """
    Mixture density f(x) = SUM_j pi_j N(x; mu_j, Sigma_j). A single point gives a float.

    Parameters
    ----------
    g: GmmParams
        The mixture
    x: np.ndarray
        A point (M,) or a matrix of points (n, M)
    """
    values = np.exp(gmm_logpdf(g, x))
    return float(values[0]) if values.size == 1 and np.ndim(x) <= 1 else values


def gmm_responsibilities(g: GmmParams, X: np.ndarray) -> np.ndarray:
    """
    Returns the (n, d) matrix whose row i is the posterior p(j | x_i) over the components.
    """
    log_joint = component_log_joint(g, X)
    log_post = log_joint - log_sum_exp(log_joint, axis=1)[:, None]
    R = np.exp(log_post)
    return R / R.sum(axis=1, keepdims=True)


def gmm_posterior(g: GmmParams, x: np.ndarray) -> Pmf:
    """
    Posterior pmf p(j | x) = pi_j N(x; mu_j, Sigma_j) / f(x) over the d components of one point.
    """
    R = gmm_responsibilities(g, x)
    if R.shape[0] != 1:
        raise InvalidArgumentError("'gmm_posterior' takes a single point; use 'gmm_responsibilities'.")
    return Pmf(R[0])


def gmm_loglik(g: GmmParams, X: np.ndarray) -> float:
    """
    Log-likelihood (nats) SUM_i log f(x_i) of a dataset.
    """
    return float(np.sum(gmm_logpdf(g, X)))


def gmm_predict(g: GmmParams, X: np.ndarray) -> np.ndarray:
    """
    Returns the most probable component of every point.
    """
    return np.argmax(component_log_joint(g, X), axis=1)


def gmm_sample(g: GmmParams, rng: Rng, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draws n points by ancestral sampling: j ~ pi, then x ~ N(mu_j, Sigma_j). Returns the points
    (n, M) and the component labels (n,).

    Parameters
    ----------
    g: GmmParams
        The mixture
    rng: Rng
        The random number generator (its state advances)
    n: int
        The number of points
    """
    labels = np.array([rng.categorical(g.weights) for _ in range(n)], dtype=int)
    eps = rng.normal((n, g.M))
    X = g.means[labels] + np.einsum("nij,nj->ni", g.cholesky[labels], eps)
    return X, labels
