import numpy as np
from scipy.special import expit, log_softmax as _log_softmax, logsumexp, softmax as _softmax


def sigmoid_function(X: np.ndarray) -> np.ndarray:
    """
    Computes and returns the logistic sigmoid 1 / (1 + e^(-X)) of the given input (overflow-free).

    Parameters
    ----------
    X: np.ndarray
        The input of the sigmoid function
    """
    return expit(X)


def d_sigmoid_function(X: np.ndarray) -> np.ndarray:
    """
    Derivative of the logistic sigmoid, sigma(X) * (1 - sigma(X)).

    Parameters
    ----------
    X: np.ndarray
        The input of the sigmoid function
    """
    s = expit(X)
    return s * (1 - s)


def log_sigmoid(X: np.ndarray) -> np.ndarray:
    """
    Computes ln(sigma(X)) = -ln(1 + e^(-X)) without under/overflow.
    """
    return -np.logaddexp(0.0, -X)


def softmax(X: np.ndarray) -> np.ndarray:
    """
    Row-wise softmax of a matrix of logits (or of a single logit vector).

    Parameters
    ----------
    X: np.ndarray
        The logits (the last axis indexes the classes)
    """
    return _softmax(X, axis=-1)


def log_softmax(X: np.ndarray) -> np.ndarray:
    """
    Row-wise logarithm of the softmax, computed with the max-subtraction trick.
    """
    return _log_softmax(X, axis=-1)


def log_sum_exp(X: np.ndarray, axis: int = -1) -> np.ndarray:
    """
    ln SUM exp(X) along an axis, stable for large magnitudes.
    """
    return logsumexp(X, axis=axis)


if __name__ == "__main__":

    X = np.array([5, 10, 0, -4, -6, 1, 2, 6, 8])
    print(sigmoid_function(X))
    print(softmax(np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]])))
