"""
Score functions s_f(x) = grad ln f(x) and the Fisher divergence
D_F(f||g) = 1/2 INT f(x) ||s_f(x) - s_g(x)||^2 dx, integrated by Simpson quadrature on 1-D grids
or 2-D tensor grids.
"""
from typing import Optional

import numpy as np

from genlearn.numcore.gradients import finite_diff_grad
from genlearn.numcore.quadrature import quad_1d, quad_2d
from genlearn.score.density import Density, GaussianDensity, ScaledDensity
from genlearn.utils.exceptions import AccuracyFailureError, InvalidArgumentError

FD_STEP = 1e-5
GRID_1D = 4096
GRID_2D = 256
REFINE_TOL = 1e-4
SCALING_TOL = 1e-6


def score_of(d: Density, x, analytic: bool = True, h: float = FD_STEP) -> np.ndarray:
    """
    Score grad_x ln f(x) at one point: the analytic score when the density has one (and 'analytic'
    is True), otherwise central differences of ln f. Where f(x) = 0 the score is the zero vector.

    Parameters
    ----------
    d: Density
        The density
    x: float, np.ndarray
        The point (dim,)
    analytic: bool (default=True)
        Whether to use the analytic score when available
    h: float (default=1e-5)
        Step of the central differences
    """
    X = d.points(x)
    if X.shape[0] != 1:
        raise InvalidArgumentError("'score_of' takes a single point; use 'batch_scores'.")
    if not np.isfinite(d.logpdf(X)[0]):
        return np.zeros(d.dim)
    if analytic and d.has_score:
        return d.score(X)[0]
    return finite_diff_grad(lambda u: float(d.logpdf(u)[0]), X[0], h)


def batch_scores(d: Density, X: np.ndarray, analytic: bool = True, h: float = FD_STEP) -> np.ndarray:
    """
    Scores of every row of X (zero rows where f vanishes), vectorised over the batch.
    """
    X = d.points(X)
    zero = ~np.isfinite(d.logpdf(X))
    if analytic and d.has_score:
        S = d.score(X)
    else:
        S = np.zeros_like(X)
        for i in range(d.dim):
            step = np.zeros(d.dim)
            step[i] = h
            with np.errstate(invalid="ignore"):
                S[:, i] = (d.logpdf(X + step) - d.logpdf(X - step)) / (2 * h)
    S[zero] = 0.0
    return S


def _integrate(d: Density, integrand, n: int) -> float:
    """
    Integral of integrand(X) (a function of an (N, dim) batch) over the box of d.
    """
    lo, hi = d.bounds()
    if d.dim == 1:
        return quad_1d(lambda u: integrand(u[:, None]), lo[0], hi[0], n)
    if d.dim == 2:
        def grid_integrand(g0, g1):
            X = np.column_stack((g0.ravel(), g1.ravel()))
            return integrand(X).reshape(g0.shape)
        return quad_2d(grid_integrand, lo, hi, n)
    raise InvalidArgumentError("Quadrature is available for 1-D and 2-D densities only.")


def _refined(d: Density, integrand, n: Optional[int]) -> float:
    """
    Integrates on a grid and on the grid with half as many intervals; raises AccuracyFailureError
    when the two disagree by more than 1e-4.
    """
    n = n or (GRID_1D if d.dim == 1 else GRID_2D)
    fine = _integrate(d, integrand, n)
    coarse = _integrate(d, integrand, n // 2)
    if not np.isfinite(fine) or abs(fine - coarse) > REFINE_TOL:
        raise AccuracyFailureError(f"The quadrature did not converge ({coarse!r} vs {fine!r}).")
    return fine


def fisher_divergence(f: Density, g: Density, n: Optional[int] = None) -> float:
    """
    Fisher divergence D_F(f||g) = 1/2 INT f ||s_f - s_g||^2 over the quadrature box of f.

    Parameters
    ----------
    f: Density
        The weighting density
    g: Density
        The second density (same dimension)
    n: int (default=None)
        Intervals per axis (4096 in 1-D, 256 in 2-D when None)
    """
    if f.dim != g.dim:
        raise InvalidArgumentError("Both densities must have the same dimension.")

    def integrand(X):
        density = f.pdf(X)
        sq = np.sum((batch_scores(f, X) - batch_scores(g, X)) ** 2, axis=1)
        return np.where(density > 0, 0.5 * density * sq, 0.0)

    return _refined(f, integrand, n)


def fisher_to_standard_normal(f: Density, X: Optional[np.ndarray] = None, n: Optional[int] = None) -> float:
    """
    D_F(f||N(0, I)) in expectation form 1/2 E_f ||X + s_f(X)||^2: a sample mean when draws X are
    given, otherwise quadrature.
    """
    if X is not None:
        X = f.points(X)
        return float(0.5 * np.mean(np.sum((X + batch_scores(f, X)) ** 2, axis=1)))

    def integrand(Y):
        density = f.pdf(Y)
        return np.where(density > 0, 0.5 * density * np.sum((Y + batch_scores(f, Y)) ** 2, axis=1), 0.0)

    return _refined(f, integrand, n)


class FisherScalingReport:

    """
    D_F(f||g), the divergence of the densities of a*X, and their ratio (expected 1/a^2).
    """

    def __init__(self, a: float, divergence: float, scaled_divergence: float):
        self.a = a
        self.divergence = divergence
        self.scaled_divergence = scaled_divergence

    @property
    def ratio(self) -> float:
        return self.scaled_divergence / self.divergence if self.divergence > 0 else float("nan")

    def to_dict(self) -> dict:
        return {"a": self.a, "divergence": self.divergence, "scaled_divergence": self.scaled_divergence,
                "ratio": self.ratio}

    def __repr__(self) -> str:
        return f"FisherScalingReport(a={self.a:g}, ratio={self.ratio:.6g})"


def fisher_scaling_check(f: Density, g: Density, a: float) -> FisherScalingReport:
    """
    Checks that the Fisher divergence between the densities of a*X equals D_F(f||g) / a^2 (within
    1e-6); raises AccuracyFailureError otherwise.
    """
    if a == 0:
        raise InvalidArgumentError("The value of 'a' must be non-zero.")
    divergence = fisher_divergence(f, g)
    scaled = fisher_divergence(ScaledDensity(f, a), ScaledDensity(g, a))
    if abs(scaled - divergence / a ** 2) > SCALING_TOL:
        raise AccuracyFailureError(f"Scaling by {a:g} gives {scaled!r}, expected {divergence / a ** 2!r}.")
    return FisherScalingReport(float(a), divergence, scaled)


def standard_normal(dim: int = 1) -> GaussianDensity:
    return GaussianDensity(np.zeros(dim), 1.0)
