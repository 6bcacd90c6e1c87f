from typing import Callable

import numpy as np

from genlearn.utils.exceptions import InvalidArgumentError


def finite_diff_grad(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """
    Central-difference gradient (f(x + h e_i) - f(x - h e_i)) / 2h of a scalar field, one
    coordinate at a time.

    Parameters
    ----------
    f: callable
        The scalar field
    x: np.ndarray
        The point at which the gradient is evaluated
    h: float (default=1e-5)
        The step size
    """
    if h <= 0:
        raise InvalidArgumentError("The value of 'h' must be positive.")
    x = np.array(x, dtype=float)
    flat = x.ravel()
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        forward, backward = flat.copy(), flat.copy()
        forward[i] += h
        backward[i] -= h
        grad[i] = (f(forward.reshape(x.shape)) - f(backward.reshape(x.shape))) / (2 * h)
    return grad.reshape(x.shape)
