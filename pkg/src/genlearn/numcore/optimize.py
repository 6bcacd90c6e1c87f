from typing import Callable, Tuple

from scipy.optimize import minimize_scalar

from genlearn.utils.exceptions import InvalidArgumentError


def maximize_scalar(g: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> Tuple[float, float]:
    """
    Maximises a unimodal function on [lo, hi] with scipy's bounded Brent method (golden-section
    steps safeguarded by parabolic interpolation). Returns (argmax, max).

    Parameters
    ----------
    g: callable
        The function to maximise
    lo: float
        Lower bound of the search interval
    hi: float
        Upper bound of the search interval
    tol: float (default=1e-10)
        Absolute tolerance on the argmax
    """
    if not lo < hi:
        raise InvalidArgumentError("The value of 'lo' must be smaller than 'hi'.")
    result = minimize_scalar(lambda d: -g(d), bounds=(lo, hi), method="bounded",
                             options={"xatol": tol, "maxiter": 1000})
    d = float(result.x)
    # the bounded method never evaluates the endpoints themselves
    candidates = [(g(d), d), (g(lo), lo), (g(hi), hi)]
    value, d = max(candidates)
    return d, float(value)
