"""
Density records used by the score-function tools. Every density evaluates ln f at a batch of
points, exposes an analytic score when one is available and carries the box used to integrate
it numerically. All logs are natural.
"""
from typing import Sequence, Tuple

import numpy as np

from genlearn.mixture.gmm import GmmParams, gmm_logpdf, gmm_responsibilities
from genlearn.numcore.quadrature import quad_1d
from genlearn.statistics.gaussian import isotropic_logpdf
from genlearn.utils.exceptions import InvalidArgumentError, InvalidModelError

# quadrature boxes reach this many standard deviations past the outermost mean
BOX_WIDTH = 8.0


class Density:

    """
    Base class of the density records. Subclasses set 'dim' and implement 'logpdf', 'bounds' and,
    when they have one, 'score' (setting 'has_score' to True).
    """

    dim = 1
    has_score = False

    def points(self, x) -> np.ndarray:
        """
        Returns x as an (n, dim) matrix: a single point (dim,), n scalars when dim is 1, or a matrix.
        """
        X = np.asarray(x, dtype=float)
        if X.ndim <= 1 and X.size % self.dim == 0:
            X = X.reshape(-1, self.dim)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise InvalidArgumentError(f"The points must have {self.dim} coordinate(s).")
        return X

    def logpdf(self, x) -> np.ndarray:
        raise NotImplementedError

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def score(self, x) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no analytic score.")

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


class GaussianDensity(Density):

    """
    Isotropic Gaussian N(mean, variance * I).
    """

    has_score = True

    def __init__(self, mean, variance: float):
        """
        Isotropic Gaussian density.

        Parameters
        ----------
        mean: float, np.ndarray
            The mean (a scalar for a 1-D density)
        variance: float
            The per-coordinate variance
        """
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        if mean.ndim != 1:
            raise InvalidArgumentError("The value of 'mean' must be a scalar or a vector.")
        if not variance > 0:
            raise InvalidArgumentError("The value of 'variance' must be positive.")
        self.mean = mean
        self.variance = float(variance)
        self.dim = mean.size

    def logpdf(self, x) -> np.ndarray:
        return isotropic_logpdf(self.points(x), self.mean, self.variance)

    def score(self, x) -> np.ndarray:
        return -(self.points(x) - self.mean) / self.variance

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        half = BOX_WIDTH * np.sqrt(self.variance)
        return self.mean - half, self.mean + half

    def to_dict(self) -> dict:
        return {"type": "gaussian", "mean": self.mean.tolist(), "variance": self.variance}

    def __repr__(self) -> str:
        return f"GaussianDensity(mean={self.mean.tolist()}, variance={self.variance:g})"


class MixtureDensity(Density):

    """
    Mixture of isotropic Gaussians SUM_j w_j N(mean_j, variance_j * I).
    """

    has_score = True

    def __init__(self, weights: Sequence[float], means, variances: Sequence[float]):
        """
        Mixture of isotropic Gaussians.

        Parameters
        ----------
        weights: sequence
            The mixing weights (a pmf)
        means: np.ndarray
            The component means, (d,) for a 1-D mixture or (d, M)
        variances: sequence
            The per-component variances

        Attributes
        ----------
        gmm: GmmParams
            The same mixture with explicit covariance matrices
        """
        means = np.asarray(means, dtype=float)
        if means.ndim == 1:
            means = means[:, None]
        variances = np.asarray(variances, dtype=float).ravel()
        if variances.size != means.shape[0]:
            raise InvalidModelError("Expected one variance per component.")
        if np.any(variances <= 0):
            raise InvalidModelError("The value of 'variances' must be positive.")
        self.dim = means.shape[1]
        self.variances = variances
        self.gmm = GmmParams(weights, means, np.array([v * np.eye(self.dim) for v in variances]))

    @property
    def weights(self) -> np.ndarray:
        return self.gmm.weights

    @property
    def means(self) -> np.ndarray:
        return self.gmm.means

    def logpdf(self, x) -> np.ndarray:
        return gmm_logpdf(self.gmm, self.points(x))

    def score(self, x) -> np.ndarray:
        """
        SUM_j r_j(x) (mean_j - x) / variance_j with r the component responsibilities.
        """
        X = self.points(x)
        R = gmm_responsibilities(self.gmm, X)
        return np.einsum("nj,njm->nm", R / self.variances, self.means[None, :, :] - X[:, None, :])

    def smoothed(self, sigma2: float) -> "MixtureDensity":
        """
        The density of X + N(0, sigma2 * I) for X drawn from this mixture.
        """
        if sigma2 < 0:
            raise InvalidArgumentError("The value of 'sigma2' must be non-negative.")
        return MixtureDensity(self.weights, self.means, self.variances + sigma2)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        half = BOX_WIDTH * np.sqrt(np.max(self.variances))
        return self.means.min(axis=0) - half, self.means.max(axis=0) + half

    def to_dict(self) -> dict:
        return {"type": "mixture",
                "weights": self.weights.tolist(),
                "means": self.means.tolist(),
                "variances": self.variances.tolist()}

    def __repr__(self) -> str:
        return f"MixtureDensity(d={self.weights.size}, dim={self.dim})"


class EnergyDensity(Density):

    """
    One-dimensional energy-based density f(x) = exp(phi(x)) / Z on a bounded support, with the
    polynomial energy phi(x) = SUM_k c_k x^k. Z is found by quadrature; the score phi'(x) never
    needs it. f is zero outside the support.
    """

    has_score = True

    def __init__(self, coefficients: Sequence[float], support: Tuple[float, float] = (-8.0, 8.0)):
        """
        Energy-based density with a polynomial energy.

        Parameters
        ----------
        coefficients: sequence
            c_0, c_1, ..., c_k (lowest degree first)
        support: tuple (default=(-8.0, 8.0))
            The interval outside of which the density is zero

        Attributes
        ----------
        log_partition: float
            ln Z over the support
        """
        coefficients = np.asarray(coefficients, dtype=float).ravel()
        lo, hi = map(float, support)
        if coefficients.size == 0 or not np.all(np.isfinite(coefficients)):
            raise InvalidArgumentError("The value of 'coefficients' must be a non-empty finite vector.")
        if not lo < hi:
            raise InvalidArgumentError("The support must be a non-empty interval.")
        self.coefficients = coefficients
        self.support = (lo, hi)
        self._energy = np.polynomial.Polynomial(coefficients)
        self._slope = self._energy.deriv()
        # shift by the grid maximum so exp does not overflow
        grid = np.linspace(lo, hi, 4097)
        shift = float(np.max(self._energy(grid)))
        self.log_partition = shift + np.log(quad_1d(lambda u: np.exp(self._energy(u) - shift), lo, hi))

    def energy(self, x) -> np.ndarray:
        return self._energy(self.points(x)[:, 0])

    def logpdf(self, x) -> np.ndarray:
        u = self.points(x)[:, 0]
        inside = (u >= self.support[0]) & (u <= self.support[1])
        return np.where(inside, self._energy(u) - self.log_partition, -np.inf)

    def score(self, x) -> np.ndarray:
        u = self.points(x)[:, 0]
        inside = (u >= self.support[0]) & (u <= self.support[1])
        return np.where(inside, self._slope(u), 0.0)[:, None]

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.array([self.support[0]]), np.array([self.support[1]])

    def to_dict(self) -> dict:
        return {"type": "energy-poly", "coefficients": self.coefficients.tolist(), "support": list(self.support)}

    def __repr__(self) -> str:
        return f"EnergyDensity(coefficients={self.coefficients.tolist()}, support={self.support})"


class ScaledDensity(Density):

    """
    Density of y = a x for x drawn from a base density: f_y(y) = f(y / a) / |a|^dim.
    """

    def __init__(self, base: Density, a: float):
        if a == 0:
            raise InvalidArgumentError("The value of 'a' must be non-zero.")
        self.base = base
        self.a = float(a)
        self.dim = base.dim
        self.has_score = base.has_score

    def logpdf(self, x) -> np.ndarray:
        return self.base.logpdf(self.points(x) / self.a) - self.dim * np.log(abs(self.a))

    def score(self, x) -> np.ndarray:
        return self.base.score(self.points(x) / self.a) / self.a

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        lo, hi = self.base.bounds()
        ends = np.stack((self.a * lo, self.a * hi))
        return ends.min(axis=0), ends.max(axis=0)

    def __repr__(self) -> str:
        return f"ScaledDensity({self.base!r}, a={self.a:g})"


def density_from_dict(record: dict) -> Density:
    """
    Builds a density from its JSON record ({'type': 'gaussian' | 'mixture' | 'energy-poly', ...}).
    """
    kind = record.get("type")
    if kind == "gaussian":
        return GaussianDensity(record["mean"], record["variance"])
    if kind == "mixture":
        return MixtureDensity(record["weights"], record["means"], record["variances"])
    if kind == "energy-poly":
        return EnergyDensity(record["coefficients"], tuple(record.get("support", (-8.0, 8.0))))
    raise InvalidArgumentError("The value of 'type' must be in {gaussian, mixture, energy-poly}.")