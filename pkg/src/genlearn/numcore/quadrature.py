from typing import Callable

import numpy as np
from scipy.integrate import simpson

from genlearn.utils.exceptions import InvalidArgumentError

MIN_INTERVALS = 16


def _nodes(lo: float, hi: float, n: int) -> np.ndarray:
    if not lo < hi:
        raise InvalidArgumentError("The value of 'lo' must be smaller than 'hi'.")
    if n < MIN_INTERVALS:
        raise InvalidArgumentError(f"The value of 'n' must be at least {MIN_INTERVALS}.")
    # composite Simpson needs an even number of intervals
    n += n % 2
    return np.linspace(lo, hi, n + 1)


def quad_1d(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, n: int = 4096) -> float:
    """
    Composite Simpson estimate of the integral of f over [lo, hi]. The integrand is evaluated once
    on the whole node vector, so it must accept (and return) numpy arrays.

    Parameters
    ----------
    f: callable
        Vectorised integrand
    lo: float
        Lower limit
    hi: float
        Upper limit
    n: int (default=4096)
        Number of intervals (rounded up to an even number, at least 16)
    """
    x = _nodes(lo, hi, n)
    return float(simpson(np.asarray(f(x), dtype=float), x=x))


def quad_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray],
            lo: np.ndarray,
            hi: np.ndarray,
            n: int = 256) -> float:
    """
    Tensor-product Simpson estimate of a double integral over the box [lo_0, hi_0] x [lo_1, hi_1].
    The integrand receives the two meshgrid coordinate arrays (indexing='ij').

    Parameters
    ----------
    f: callable
        Vectorised integrand f(x0, x1)
    lo: np.ndarray
        Lower corner of the box
    hi: np.ndarray
        Upper corner of the box
    n: int (default=256)
        Number of intervals per axis
    """
    x0 = _nodes(lo[0], hi[0], n)
    x1 = _nodes(lo[1], hi[1], n)
    g0, g1 = np.meshgrid(x0, x1, indexing="ij")
    values = np.asarray(f(g0, g1), dtype=float)
    return float(simpson(simpson(values, x=x1, axis=1), x=x0))
