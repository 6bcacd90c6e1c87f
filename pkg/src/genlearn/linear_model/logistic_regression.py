from typing import Tuple

import numpy as np

from genlearn.data.dataset import Dataset
from genlearn.linear_model.ascent import gradient_ascent
from genlearn.statistics.sigmoid_function import log_sigmoid, sigmoid_function
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import InvalidArgumentError, InvalidModelError


class LogRegParams:

    """
    Weights of a logistic (binary, a vector of length K+1) or softmax (multiclass, an M x (K+1)
    matrix) regression model, intercept first. Also records how the fit that produced them ended.
    """

    def __init__(self, w: np.ndarray, n_steps: int = 0, stop_reason: str = None):
        """
        Weights of a logistic or softmax regression model.

        Parameters
        ----------
        w: np.ndarray
            Weight vector (K+1,) or weight matrix (M, K+1)
        n_steps: int (default=0)
            Number of ascent steps taken by the fit
        stop_reason: str (default=None)
            'converged', 'max_steps' or 'stalled'
        """
        w = np.array(w, dtype=float)
        if w.ndim not in (1, 2) or not np.all(np.isfinite(w)):
            raise InvalidModelError("The value of 'w' must be a finite vector or matrix.")
        self.w = w
        self.n_steps = n_steps
        self.stop_reason = stop_reason

    @property
    def is_multiclass(self) -> bool:
        return self.w.ndim == 2

    def to_dict(self) -> dict:
        return {"w": self.w.tolist(), "n_steps": self.n_steps, "stop_reason": self.stop_reason}

    @classmethod
    def from_dict(cls, record: dict) -> "LogRegParams":
        return cls(np.array(record["w"]), record.get("n_steps", 0), record.get("stop_reason"))


def _binary_targets(ds: Dataset) -> np.ndarray:
    y = ds.class_indices()
    if np.any(y > 1):
        raise InvalidArgumentError("Logistic regression needs binary targets in {0, 1}.")
    return y.astype(float)


def loglik_logistic(w: np.ndarray, ds: Dataset) -> float:
    """
    Conditional log-likelihood SUM_i [y_i ln p_i + (1 - y_i) ln(1 - p_i)] in nats, with
    p_i = sigma(w^T [1; x_i]).

    Parameters
    ----------
    w: np.ndarray
        Weights (K+1,)
    ds: Dataset
        Features and binary targets
    """
    y = _binary_targets(ds)
    a = ds.augmented() @ w
    return float(np.sum(y * log_sigmoid(a) + (1 - y) * log_sigmoid(-a)))


def logistic_gradient(w: np.ndarray, ds: Dataset) -> np.ndarray:
    """
    Gradient of the logistic log-likelihood, SUM_i (y_i - p_i) [1; x_i].
    """
    y = _binary_targets(ds)
    X = ds.augmented()
    return X.T @ (y - sigmoid_function(X @ w))


def logistic_hessian(w: np.ndarray, ds: Dataset) -> np.ndarray:
    """
    Hessian of the logistic log-likelihood, -SUM_i p_i (1 - p_i) [1; x_i][1; x_i]^T (negative
    semi-definite, so the log-likelihood is concave).
    """
    X = ds.augmented()
    p = sigmoid_function(X @ w)
    return -(X * (p * (1 - p))[:, None]).T @ X


def fit_logistic(ds: Dataset, cfg: ExperimentConfig) -> Tuple[LogRegParams, np.ndarray]:
    """
    Fits logistic regression by gradient ascent w <- w + gamma SUM_i (y_i - p_i) x_i from w = 0.
    Returns the parameters and the log-likelihood trace (starting point first).

    Parameters
    ----------
    ds: Dataset
        Features and binary targets
    cfg: ExperimentConfig
        Learning rate, step budget and backtracking flag
    """
    _binary_targets(ds)
    w0 = np.zeros(ds.X.shape[1] + 1)
    result = gradient_ascent(lambda w: loglik_logistic(w, ds), lambda w: logistic_gradient(w, ds), w0, cfg,
                             name="logistic regression")
    return LogRegParams(result.w, result.n_steps, result.stop_reason), result.trace


def predict_proba_logistic(params: LogRegParams, X: np.ndarray) -> np.ndarray:
    """
    Returns P(y = 1 | x) for every row of X.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] + 1 != params.w.size:
        raise InvalidArgumentError(f"Expected {params.w.size - 1} feature(s), got {X.shape[1]}.")
    return sigmoid_function(params.w[0] + X @ params.w[1:])


def predict_logistic(params: LogRegParams, X: np.ndarray) -> np.ndarray:
    """
    Predicts class 1 where P(y = 1 | x) >= 1/2, class 0 otherwise.
    """
    return (predict_proba_logistic(params, X) >= 0.5).astype(int)
