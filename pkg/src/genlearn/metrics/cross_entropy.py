import numpy as np

from genlearn.statistics.sigmoid_function import log_sigmoid, log_softmax

# conversion factor between the two logarithm bases used across the package
NATS_PER_BIT = np.log(2.0)


def binary_nll(y_true: np.ndarray, logits: np.ndarray) -> float:
    """
    Negative Bernoulli log-likelihood in nats, -SUM[y ln p + (1 - y) ln(1 - p)] with p = sigma(a),
    computed from the logits a so that saturated predictions stay finite.

    Parameters
    ----------
    y_true: np.ndarray
        Binary targets
    logits: np.ndarray
        Pre-activations of the logistic output
    """
    y_true = np.asarray(y_true, dtype=float).reshape(logits.shape)
    return float(-np.sum(y_true * log_sigmoid(logits) + (1 - y_true) * log_sigmoid(-logits)))


def categorical_nll(y_true: np.ndarray, logits: np.ndarray) -> float:
    """
    Negative categorical log-likelihood in nats, -SUM_i ln p_{i, y_i}, from a logit matrix.

    Parameters
    ----------
    y_true: np.ndarray
        Class indices (n,) or one-hot rows (n, M)
    logits: np.ndarray
        Logit matrix (n, M)
    """
    log_p = log_softmax(logits)
    if np.ndim(y_true) == 2:
        return float(-np.sum(y_true * log_p))
    idx = np.asarray(y_true, dtype=int)
    return float(-np.sum(log_p[np.arange(len(idx)), idx]))


def conditional_cross_entropy(y_true: np.ndarray, probs: np.ndarray) -> float:
    """
    Empirical conditional cross entropy (bits) of a classifier: the mean of -log2 p(y_i|x_i).
    Minimising it over the parameters is the same as maximising the conditional log-likelihood.

    Parameters
    ----------
    y_true: np.ndarray
        Class indices (n,)
    probs: np.ndarray
        Predicted class probabilities (n, M); for binary models a vector of P(y=1|x)
    """
    y_true = np.asarray(y_true, dtype=int)
    probs = np.asarray(probs, dtype=float)
    if probs.ndim == 1:
        probs = np.column_stack((1 - probs, probs))
    with np.errstate(divide="ignore"):
        return float(-np.mean(np.log2(probs[np.arange(len(y_true)), y_true])))
