"""
Tweedie's formula E[X | Y = y] = y + sigma2 grad ln f_Y(y) for Y = X + N(0, sigma2 I), and the
Bayes posterior means it is checked against.
"""
from typing import Sequence

import numpy as np

from genlearn.numcore.quadrature import quad_1d
from genlearn.score.density import Density
from genlearn.score.fisher import score_of
from genlearn.statistics.sigmoid_function import log_sum_exp
from genlearn.utils.exceptions import InvalidArgumentError


def tweedie_estimate(f_y: Density, y, sigma2: float) -> np.ndarray:
    """
    Posterior-mean estimate y + sigma2 * s_{f_y}(y) of the clean signal.

    Parameters
    ----------
    f_y: Density
        The density of the noisy observations
    y: float, np.ndarray
        The observation
    sigma2: float
        The noise variance (0 returns y)
    """
    if sigma2 < 0:
        raise InvalidArgumentError("The value of 'sigma2' must be non-negative.")
    y = f_y.points(y)[0]
    if sigma2 == 0:
        return y
    return y + sigma2 * score_of(f_y, y)


def posterior_mean_quadrature(prior: Density, y: float, sigma2: float, n: int = 4096) -> float:
    """
    E[X | Y = y] for a 1-D prior under Gaussian noise, as the ratio of the quadratures of
    x f(x) N(y; x, sigma2) and f(x) N(y; x, sigma2) over the prior's box.
    """
    if prior.dim != 1:
        raise InvalidArgumentError("The quadrature posterior mean needs a 1-D prior.")
    if not sigma2 > 0:
        raise InvalidArgumentError("The value of 'sigma2' must be positive.")
    lo, hi = prior.bounds()
    grid = np.linspace(lo[0], hi[0], n + 1)
    # shared shift so the exponentials stay in range
    shift = np.max(prior.logpdf(grid) - (y - grid) ** 2 / (2 * sigma2))

    def weight(u):
        return np.exp(prior.logpdf(u) - (y - u) ** 2 / (2 * sigma2) - shift)

    evidence = quad_1d(weight, lo[0], hi[0], n)
    return quad_1d(lambda u: u * weight(u), lo[0], hi[0], n) / evidence


def posterior_mean_discrete(atoms: Sequence[float], weights: Sequence[float], y: float, sigma2: float) -> float:
    """
    E[X | Y = y] for a prior on finitely many atoms, by direct Bayes summation.
    """
    atoms = np.asarray(atoms, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if atoms.shape != weights.shape or np.any(weights < 0) or not weights.sum() > 0:
        raise InvalidArgumentError("Expected one non-negative weight per atom.")
    if not sigma2 > 0:
        raise InvalidArgumentError("The value of 'sigma2' must be positive.")
    with np.errstate(divide="ignore"):
        log_post = np.log(weights) - (y - atoms) ** 2 / (2 * sigma2)
    post = np.exp(log_post - log_sum_exp(log_post))
    return float(np.sum(post * atoms))
