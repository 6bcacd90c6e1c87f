"""
Probabilistic PCA: x = W z + mu + sigma * eps with z ~ N(0, I_K) and eps ~ N(0, I_M). The marginal
of x is N(mu, C) with C = W W^T + sigma^2 I (named C rather than K, which is the latent width).
"""
import warnings
from typing import Tuple, Union

import numpy as np

from genlearn.data.dataset import Dataset
from genlearn.numcore.linalg import eigh_sym
from genlearn.numcore.rng import Rng
from genlearn.statistics.gaussian import mvn_logpdf
from genlearn.utils.exceptions import DegenerateSpectrumError, InvalidArgumentError, InvalidModelError

# relative size (w.r.t. the largest eigenvalue) of the rounding noise tolerated in the spectrum
SPECTRUM_TOL = 1e-12


def _as_matrix(ds: Union[Dataset, np.ndarray]) -> np.ndarray:
    return np.asarray(ds.X if isinstance(ds, Dataset) else ds, dtype=float)


class PpcaParams:

    """
    Parameters (W, mu, sigma^2) of a PPCA model with latent width K < M.
    """

    def __init__(self, W: np.ndarray, mu: np.ndarray, sigma2: float):
        """
        Parameters of a PPCA model.

        Parameters
        ----------
        W: np.ndarray
            The loading matrix (M, K)
        mu: np.ndarray
            The mean vector (M,)
        sigma2: float
            The isotropic noise variance (zero only for data lying exactly on a subspace)
        """
        W = np.atleast_2d(np.asarray(W, dtype=float))
        mu = np.asarray(mu, dtype=float).ravel()
        self._check_init(W, mu, sigma2)
        self.W = W
        self.mu = mu
        self.sigma2 = float(sigma2)

    @staticmethod
    def _check_init(W: np.ndarray, mu: np.ndarray, sigma2: float):
        if W.ndim != 2 or W.shape[1] >= W.shape[0]:
            raise InvalidModelError("The value of 'W' must be an (M, K) matrix with K < M.")
        if mu.size != W.shape[0]:
            raise InvalidModelError("The length of 'mu' must match the number of rows of 'W'.")
        if not np.isfinite(sigma2) or sigma2 < 0:
            raise InvalidModelError("The value of 'sigma2' must be a non-negative real.")

    @property
    def M(self) -> int:
        return self.W.shape[0]

    @property
    def K(self) -> int:
        return self.W.shape[1]

    def covariance(self) -> np.ndarray:
        """
        Returns the marginal covariance C = W W^T + sigma^2 I.
        """
        return self.W @ self.W.T + self.sigma2 * np.eye(self.M)

    def with_loadings(self, W: np.ndarray) -> "PpcaParams":
        return PpcaParams(W, self.mu, self.sigma2)

    def to_dict(self) -> dict:
        return {"W": self.W.tolist(), "mu": self.mu.tolist(), "sigma2": self.sigma2}

    @classmethod
    def from_dict(cls, record: dict) -> "PpcaParams":
        return cls(np.array(record["W"]), np.array(record["mu"]), record["sigma2"])

    def __repr__(self) -> str:
        return f"PpcaParams(M={self.M}, K={self.K}, sigma2={self.sigma2:.4g})"


def ppca_fit(ds: Union[Dataset, np.ndarray], K: int) -> PpcaParams:
    """
    Maximum-likelihood PPCA in closed form. mu is the sample mean; sigma^2 is the mean of the M-K
    smallest eigenvalues of S = (1/n) SUM (x_i - mu)(x_i - mu)^T; W = U_K (Lambda_K - sigma^2 I)^(1/2)
    with the rotation left at the identity.

    Parameters
    ----------
    ds: Dataset, np.ndarray
        The data (n, M), with n > M >= K+1
    K: int
        The latent width
    """
    X = _as_matrix(ds)
    n, M = X.shape
    if K < 1 or int(K) != K:
        raise InvalidArgumentError("The value of 'K' must be a positive integer.")
    if not n > M >= K + 1:
        raise InvalidArgumentError(f"PPCA needs n > M >= K+1 (got n={n}, M={M}, K={K}).")
    mu = X.mean(axis=0)
    centered = X - mu
    S = centered.T @ centered / n
    lam, U = eigh_sym((S + S.T) / 2)
    tol = SPECTRUM_TOL * max(lam[0], np.finfo(float).tiny)
    sigma2 = float(np.mean(lam[K:]))
    if sigma2 < 0:
        if sigma2 < -tol:
            raise DegenerateSpectrumError(f"The residual variance is negative ({sigma2:.3g}).")
        warnings.warn(f"Residual variance {sigma2:.3g} clipped at zero.", Warning)
        sigma2 = 0.0
    excess = lam[:K] - sigma2
    if np.any(excess < -tol):
        raise DegenerateSpectrumError(f"lambda_K = {lam[K - 1]:.6g} is below sigma^2 = {sigma2:.6g}.")
    W = U[:, :K] * np.sqrt(np.clip(excess, 0.0, None))
    return PpcaParams(W, mu, sigma2)


def ppca_loglik(p: PpcaParams, ds: Union[Dataset, np.ndarray]) -> float:
    """
    Log-likelihood (nats) SUM_i log N(x_i; mu, W W^T + sigma^2 I).
    """
    X = np.atleast_2d(_as_matrix(ds))
    return float(np.sum(mvn_logpdf(X, p.mu, p.covariance())))


def ppca_posterior(p: PpcaParams, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Posterior of the latent variable: N(A^-1 W^T (x - mu), sigma^2 A^-1) with A = W^T W + sigma^2 I.
    A matrix of points (n, M) gives the (n, K) matrix of posterior means (the covariance does not
    depend on x).

    Parameters
    ----------
    p: PpcaParams
        The model (sigma^2 > 0)
    x: np.ndarray
        A point (M,) or a matrix of points (n, M)
    """
    if p.sigma2 <= 0:
        raise InvalidArgumentError("The posterior needs sigma^2 > 0.")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != p.M:
        raise InvalidArgumentError(f"The points must have {p.M} coordinates.")
    A = p.W.T @ p.W + p.sigma2 * np.eye(p.K)
    mean = np.linalg.solve(A, p.W.T @ (x - p.mu).T).T
    cov = p.sigma2 * np.linalg.inv(A)
    return mean, (cov + cov.T) / 2


def ppca_sample(p: PpcaParams, rng: Rng, n: int) -> np.ndarray:
    """
    Draws n points from the generative model x = W z + mu + sigma * eps.
    """
    z = rng.normal((n, p.K))
    eps = rng.normal((n, p.M))
    return z @ p.W.T + p.mu + np.sqrt(p.sigma2) * eps


class PPCA:

    """
    Estimator wrapper around the closed-form PPCA fit. 'transform' maps every example onto its
    posterior latent mean.
    """

    def __init__(self, n_components: int = 2):
        """
        Estimator wrapper around the closed-form PPCA fit.

        Parameters
        ----------
        n_components: int (default=2)
            The latent width K

        Attributes
        ----------
        fitted: bool
            Whether 'PPCA' is already fitted
        params: PpcaParams
            The fitted parameters
        """
        if n_components < 1:
            raise InvalidArgumentError("The value of 'n_components' must be greater than 0.")
        self.n_components = n_components
        self.fitted = False
        self.params = None

    def fit(self, dataset: Dataset) -> "PPCA":
        self.params = ppca_fit(dataset, self.n_components)
        self.fitted = True
        return self

    def transform(self, dataset: Dataset) -> np.ndarray:
        if not self.fitted:
            raise Warning("Fit 'PPCA' before calling 'transform'.")
        return ppca_posterior(self.params, _as_matrix(dataset))[0]

    def fit_transform(self, dataset: Dataset) -> np.ndarray:
        return self.fit(dataset).transform(dataset)

    def score(self, dataset: Dataset) -> float:
        """
        Mean log-likelihood per example (nats).
        """
        if not self.fitted:
            raise Warning("Fit 'PPCA' before calling 'score'.")
        return ppca_loglik(self.params, dataset) / _as_matrix(dataset).shape[0]


if __name__ == "__main__":

    from genlearn.numcore.rng import Rng

    truth = PpcaParams(np.array([[2.0, 0.0], [1.0, 1.0], [0.0, 0.5], [0.3, 0.2]]), np.zeros(4), 0.1)
    X = ppca_sample(truth, Rng(0), 500)
    fitted = ppca_fit(X, 2)
    print(fitted)
    print(f"loglik: truth={ppca_loglik(truth, X):.3f}, fitted={ppca_loglik(fitted, X):.3f}")
