"""
Expectation-maximization for Gaussian mixtures. The E step computes the posterior of every
component for every point; the M step re-estimates weights, means and covariances from the
responsibility-weighted data.
"""
import warnings
from typing import Union

import numpy as np

from genlearn.clustering.seeding import kmeans_plusplus_centers
from genlearn.data.dataset import Dataset
from genlearn.mixture.gmm import GmmParams, gmm_loglik, gmm_responsibilities
from genlearn.numcore.linalg import cholesky_lower
from genlearn.numcore.rng import Rng
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import ComponentCollapseError, InvalidArgumentError, InvalidModelError

# smallest effective number of points a component may keep
COLLAPSE_TOL = 1e-8
# relative size of the ridge added to every covariance after an M step
FLOOR_SCALE = 1e-8
CONVERGENCE_TOL = 1e-8
MAX_RESEEDS = 1


def _as_matrix(ds: Union[Dataset, np.ndarray]) -> np.ndarray:
    X = np.asarray(ds.X if isinstance(ds, Dataset) else ds, dtype=float)
    return X[:, None] if X.ndim == 1 else X


def sample_covariance(X: np.ndarray) -> np.ndarray:
    """
    Returns S = (1/n) SUM (x_i - mean)(x_i - mean)^T.
    """
    centered = X - X.mean(axis=0)
    return centered.T @ centered / X.shape[0]


def covariance_floor(X: np.ndarray) -> float:
    """
    Returns the ridge 1e-8 trace(S) / M added to every covariance after an M step.
    """
    S = sample_covariance(X)
    return FLOOR_SCALE * np.trace(S) / X.shape[1]


class EmState:

    """
    State of an EM run: the current mixture, the responsibilities of the last E step and the
    log-likelihood trace (nats, one entry per parameter set visited since the last (re)seed).
    """

    def __init__(self, params: GmmParams, responsibilities: np.ndarray, trace, reseeds: int = 0):
        """
        State of an EM run.

        Parameters
        ----------
        params: GmmParams
            The current mixture
        responsibilities: np.ndarray
            The (n, d) posterior matrix of the last E step
        trace: list, np.ndarray
            The log-likelihood after every step
        reseeds: int (default=0)
            How many collapsed components have been reseeded so far
        """
        responsibilities = np.asarray(responsibilities, dtype=float)
        if responsibilities.ndim != 2 or responsibilities.shape[1] != params.d:
            raise InvalidArgumentError(f"The responsibilities must be an (n, {params.d}) matrix.")
        if not np.allclose(responsibilities.sum(axis=1), 1.0, rtol=0, atol=1e-12):
            raise InvalidArgumentError("Every row of 'responsibilities' must be a pmf.")
        self.params = params
        self.responsibilities = responsibilities
        self.trace = np.asarray(trace, dtype=float)
        self.reseeds = reseeds

    @classmethod
    def start(cls, params: GmmParams, ds: Union[Dataset, np.ndarray], reseeds: int = 0) -> "EmState":
        """
        Builds the state of a run that starts at 'params'.
        """
        X = _as_matrix(ds)
        return cls(params, gmm_responsibilities(params, X), [gmm_loglik(params, X)], reseeds)

    @property
    def loglik(self) -> float:
        return float(self.trace[-1])

    @property
    def n_steps(self) -> int:
        return self.trace.size - 1

    def __repr__(self) -> str:
        return f"EmState(d={self.params.d}, steps={self.n_steps}, loglik={self.loglik:.4f})"


def em_step(state: EmState, ds: Union[Dataset, np.ndarray]) -> EmState:
    """
    One EM iteration. E step: r_ij = p(j | x_i) under the current mixture. M step: with
    n_j = SUM_i r_ij, pi_j = n_j / n, mu_j = SUM_i r_ij x_i / n_j and
    Sigma_j = SUM_i r_ij (x_i - mu_j)(x_i - mu_j)^T / n_j + floor I. The log-likelihood of the
    new mixture is appended to the trace.

    Parameters
    ----------
    state: EmState
        The current state
    ds: Dataset, np.ndarray
        The data (n, M)
    """
    X = _as_matrix(ds)
    params = state.params
    if X.shape[1] != params.M:
        raise InvalidArgumentError(f"The data must have {params.M} column(s).")
    n = X.shape[0]
    # E step
    R = gmm_responsibilities(params, X)
    # M step
    n_eff = R.sum(axis=0)
    floor = covariance_floor(X)
    means = np.zeros_like(params.means)
    covs = np.zeros_like(params.covs)
    for j in range(params.d):
        if n_eff[j] < COLLAPSE_TOL:
            raise ComponentCollapseError(j, f"Effective number of points {n_eff[j]:.3g}.")
        means[j] = R[:, j] @ X / n_eff[j]
        diff = X - means[j]
        cov = (R[:, j, None] * diff).T @ diff / n_eff[j]
        covs[j] = (cov + cov.T) / 2 + floor * np.eye(params.M)
        try:
            cholesky_lower(covs[j])
        except InvalidModelError as err:
            raise ComponentCollapseError(j, "Singular covariance.") from err
    weights = n_eff / n
    new_params = GmmParams(weights / weights.sum(), means, covs)
    trace = np.append(state.trace, gmm_loglik(new_params, X))
    return EmState(new_params, R, trace, state.reseeds)


def initial_params(X: np.ndarray, d: int, rng: Rng) -> GmmParams:
    """
    Starting mixture: k-means++ seed points as means, the (floored) sample covariance for every
    component and uniform weights.
    """
    S = sample_covariance(X) + covariance_floor(X) * np.eye(X.shape[1])
    means = kmeans_plusplus_centers(X, d, rng)
    return GmmParams(np.full(d, 1.0 / d), means, np.tile(S, (d, 1, 1)))


def _reseed(state: EmState, X: np.ndarray, component: int, rng: Rng) -> EmState:
    """
    Moves a collapsed component onto a random data point with the sample covariance and weight 1/d.
    """
    params = state.params
    weights = params.weights.copy()
    weights[component] = 1.0 / params.d
    means = params.means.copy()
    means[component] = X[rng.integers(X.shape[0])]
    covs = params.covs.copy()
    covs[component] = sample_covariance(X) + covariance_floor(X) * np.eye(X.shape[1])
    reseeded = GmmParams(weights / weights.sum(), means, covs)
    return EmState.start(reseeded, X, state.reseeds + 1)


def em_fit(ds: Union[Dataset, np.ndarray], d: int, cfg: ExperimentConfig) -> EmState:
    """
    Fits a mixture of d Gaussians by EM, starting from k-means++ seeds, until the log-likelihood
    changes by less than 1e-8 nats or cfg.max_steps steps have run. A collapsed component is
    reseeded once (the trace restarts there); a second collapse is raised.

    Parameters
    ----------
    ds: Dataset, np.ndarray
        The data (n, M), with n >= d (M+1)
    d: int
        The number of components
    cfg: ExperimentConfig
        Seed, maximum number of steps and verbosity
    """
    X = _as_matrix(ds)
    n, M = X.shape
    if d < 1 or int(d) != d:
        raise InvalidArgumentError("The value of 'd' must be a positive integer.")
    if n < d * (M + 1):
        raise InvalidArgumentError(f"EM with {d} component(s) in {M} dimension(s) needs at least {d * (M + 1)} points.")
    rng = Rng(cfg.seed, "em/init")
    state = EmState.start(initial_params(X, d, rng), X)
    for step in range(1, cfg.max_steps + 1):
        try:
            new_state = em_step(state, X)
        except ComponentCollapseError as err:
            if state.reseeds >= MAX_RESEEDS:
                raise
            warnings.warn(f"Component {err.component} collapsed at step {step}; reseeding it.", Warning)
            state = _reseed(state, X, err.component, rng)
            continue
        delta = new_state.loglik - state.loglik
        state = new_state
        if cfg.verbose:
            print(f"Step {step}/{cfg.max_steps} -- loglik = {state.loglik:.4f}")
        if abs(delta) < CONVERGENCE_TOL:
            break
    return state


if __name__ == "__main__":

    from genlearn.mixture.gmm import gmm_sample

    truth = GmmParams([0.5, 0.5], [[-5.0], [5.0]], [[[1.0]], [[1.0]]])
    X, _ = gmm_sample(truth, Rng(0), 400)
    fitted = em_fit(X, 2, ExperimentConfig(seed=1, max_steps=200, verbose=True))
    print(fitted.params)
    print(fitted.params.means.ravel())
