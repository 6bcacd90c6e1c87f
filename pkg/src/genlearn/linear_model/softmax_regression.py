from typing import Tuple

import numpy as np

from genlearn.data.dataset import Dataset
from genlearn.linear_model.ascent import gradient_ascent
from genlearn.linear_model.logistic_regression import LogRegParams
from genlearn.statistics.sigmoid_function import log_softmax, softmax
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import InvalidArgumentError


def softmax_probs(W: np.ndarray, X: np.ndarray) -> np.ndarray:
    """
    Class probabilities p_im = softmax(W [1; x_i])_m for every row of X.

    Parameters
    ----------
    W: np.ndarray
        Weight matrix (M, K+1), intercept first
    X: np.ndarray
        Raw features (n, K)
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] + 1 != W.shape[1]:
        raise InvalidArgumentError(f"Expected {W.shape[1] - 1} feature(s), got {X.shape[1]}.")
    return softmax(W[:, 0] + X @ W[:, 1:].T)


def loglik_multiclass(W: np.ndarray, X: np.ndarray, Y: np.ndarray) -> float:
    """
    Conditional log-likelihood SUM_i SUM_m y_im ln p_im in nats (Y one-hot).
    """
    logits = W[:, 0] + X @ W[:, 1:].T
    return float(np.sum(Y * log_softmax(logits)))


def fit_multiclass(ds: Dataset, cfg: ExperimentConfig, n_classes: int = None) -> Tuple[LogRegParams, np.ndarray]:
    """
    Fits multiclass (softmax) regression by gradient ascent on the conditional log-likelihood,
    starting from W = 0. The gradient with respect to row m of W is SUM_i (y_im - p_im) [1; x_i].
    Returns the parameters and the log-likelihood trace (starting point first).

    Parameters
    ----------
    ds: Dataset
        Features and class indices in {0, ..., M-1}
    cfg: ExperimentConfig
        Learning rate, step budget and backtracking flag
    n_classes: int (default=None)
        The number of classes M (None -> 1 + the largest index)
    """
    y = ds.class_indices(n_classes)
    M = int(y.max()) + 1 if n_classes is None else n_classes
    if len(np.unique(y)) < 2:
        raise InvalidArgumentError("Multiclass regression needs at least two classes present.")
    X = ds.X
    A = ds.augmented()
    Y = np.eye(M)[y]
    shape = (M, A.shape[1])

    def objective(w_flat):
        return loglik_multiclass(w_flat.reshape(shape), X, Y)

    def gradient(w_flat):
        P = softmax(A @ w_flat.reshape(shape).T)
        return ((Y - P).T @ A).ravel()

    result = gradient_ascent(objective, gradient, np.zeros(M * A.shape[1]), cfg, name="multiclass regression")
    return LogRegParams(result.w.reshape(shape), result.n_steps, result.stop_reason), result.trace


def predict_multiclass(params: LogRegParams, X: np.ndarray) -> np.ndarray:
    """
    Predicts the most probable class for every row of X.
    """
    return np.argmax(softmax_probs(params.w, X), axis=1)
