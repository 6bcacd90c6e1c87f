import numpy as np

from genlearn.data.dataset import Dataset
from genlearn.linear_model.ascent import gradient_ascent
from genlearn.statistics.gaussian import LOG_2PI
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import InvalidArgumentError, SingularDesignError, InvalidModelError

# condition number of X^T X above which the normal equations are declared singular
MAX_CONDITION = 1e12


class LinRegParams:

    """
    Parameters (w, sigma^2) of the Gaussian linear model y ~ N(w^T [1; x], sigma^2), intercept
    first. A zero noise variance is allowed for exact fits and flagged through 'exact'.
    """

    def __init__(self, w: np.ndarray, sigma2: float, rss: float = None, exact: bool = False):
        """
        Parameters of the Gaussian linear model.

        Parameters
        ----------
        w: np.ndarray
            Weights (K+1,), intercept first
        sigma2: float
            Noise variance (>= 0)
        rss: float (default=None)
            Residual sum of squares of the fit that produced the parameters
        exact: bool (default=False)
            Whether the fit interpolates the data (zero residuals up to rounding)
        """
        w = np.asarray(w, dtype=float).ravel()
        if not np.all(np.isfinite(w)):
            raise InvalidModelError("The entries of 'w' must be finite.")
        if not sigma2 >= 0:
            raise InvalidModelError("The value of 'sigma2' must be non-negative.")
        self.w = w
        self.sigma2 = float(sigma2)
        self.rss = rss
        self.exact = bool(exact) or self.sigma2 == 0.0

    def to_dict(self) -> dict:
        return {"w": self.w.tolist(), "sigma2": self.sigma2, "rss": self.rss, "exact": self.exact}

    @classmethod
    def from_dict(cls, record: dict) -> "LinRegParams":
        return cls(np.array(record["w"]), record["sigma2"], record.get("rss"), record.get("exact", False))


def _check_inputs(w: np.ndarray, X: np.ndarray) -> None:
    if X.shape[1] + 1 != w.size:
        raise InvalidArgumentError(f"Expected {w.size - 1} feature(s), got {X.shape[1]}.")


def fit_linear(ds: Dataset) -> LinRegParams:
    """
    Maximum-likelihood fit of the Gaussian linear model (ordinary least squares):
    w = (X^T X)^-1 X^T y on the intercept-augmented design, sigma^2 = RSS / n.

    Parameters
    ----------
    ds: Dataset
        Raw features (n, K) and real targets (n,)
    """
    X = ds.augmented()
    y = np.asarray(ds.y, dtype=float)
    n, k1 = X.shape
    if n < k1:
        raise InvalidArgumentError(f"Need at least {k1} examples for {k1 - 1} feature(s), got {n}.")
    gram = X.T @ X
    if np.linalg.cond(gram) > MAX_CONDITION:
        raise SingularDesignError("The augmented design matrix is (numerically) rank deficient.")
    w = np.linalg.solve(gram, X.T @ y)
    residuals = y - X @ w
    rss = float(residuals @ residuals)
    exact = rss / n <= 1e-20 * max(1.0, float(np.mean(y ** 2)))
    return LinRegParams(w, rss / n, rss, exact)


def predict_linear(params: LinRegParams, x: np.ndarray) -> np.ndarray:
    """
    Predicts w^T [1; x] for one feature vector (returns a float) or for every row of a matrix.

    Parameters
    ----------
    params: LinRegParams
        The fitted parameters
    x: np.ndarray
        A feature vector (K,) or a matrix (n, K)
    """
    x = np.asarray(x, dtype=float)
    X = np.atleast_2d(x)
    _check_inputs(params.w, X)
    out = params.w[0] + X @ params.w[1:]
    return float(out[0]) if x.ndim == 1 else out


def loglik_linear(params: LinRegParams, ds: Dataset) -> float:
    """
    Conditional log-likelihood SUM_i ln N(y_i; w^T [1; x_i], sigma^2) in nats.

    Parameters
    ----------
    params: LinRegParams
        The parameters (sigma^2 > 0)
    ds: Dataset
        The data
    """
    if params.sigma2 <= 0:
        raise InvalidArgumentError("The log-likelihood needs a positive noise variance.")
    _check_inputs(params.w, ds.X)
    residuals = np.asarray(ds.y, dtype=float) - ds.augmented() @ params.w
    n = residuals.size
    return float(-0.5 * (residuals @ residuals) / params.sigma2 - 0.5 * n * (LOG_2PI + np.log(params.sigma2)))


def fit_linear_gradient(ds: Dataset, cfg: ExperimentConfig) -> LinRegParams:
    """
    Maximises the Gaussian log-likelihood in w by gradient ascent from w = 0 (the ascent
    direction SUM_i (y_i - w^T x_i) x_i does not depend on sigma^2), then sets sigma^2 = RSS / n.
    Its limit is the closed-form least-squares fit.

    Parameters
    ----------
    ds: Dataset
        Raw features (n, K) and real targets (n,)
    cfg: ExperimentConfig
        Learning rate, step budget and backtracking flag
    """
    X = ds.augmented()
    y = np.asarray(ds.y, dtype=float)

    def objective(w):
        r = y - X @ w
        return -0.5 * float(r @ r)

    result = gradient_ascent(objective, lambda w: X.T @ (y - X @ w), np.zeros(X.shape[1]), cfg,
                             name="linear regression")
    rss = -2 * result.trace[-1]
    return LinRegParams(result.w, rss / len(y), rss)
