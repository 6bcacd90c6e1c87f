"""
Noise schedule of a denoising diffusion model and the Gaussian quantities it fixes: the
forward marginals g(z_t|x) and the exact backward posteriors q(z_{t-1}|z_t, x).

Every table is indexed by the step t = 0, ..., T with beta[0] = 0 and alpha[0] = 1, so
alpha[t] = PROD_{tau <= t} (1 - beta[tau]).
"""
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from genlearn.numcore.rng import Rng
from genlearn.utils.exceptions import InvalidArgumentError, InvalidScheduleError

DEFAULT_T = 50
DEFAULT_BETAS = (1e-4, 0.05)


class DiffusionSchedule:

    """
    The per-step noise levels beta_1..beta_T and the derived tables alpha_t, beta'_t (variance
    of the backward step) and sigma2_t (variance of the exact backward posterior).
    """

    def __init__(self, betas: Sequence[float]):
        """
        The per-step noise levels of a diffusion model.

        Parameters
        ----------
        betas: list
            beta_1, ..., beta_T, each in (0, 1), with T >= 2

        Attributes
        ----------
        beta: np.ndarray
            (T+1,) with beta[0] = 0
        alpha: np.ndarray
            (T+1,) cumulative products, alpha[0] = 1
        beta_prime: np.ndarray
            (T+1,) backward step variances; beta_prime[1] = beta_1
        sigma2: np.ndarray
            (T+1,) backward posterior variances; sigma2[1] = 0
        """
        betas = np.array(betas, dtype=float).ravel()
        self._check_init(betas)
        self.T = betas.size
        self.beta = np.concatenate(([0.0], betas))
        self.alpha = np.cumprod(1.0 - self.beta)
        self.sigma2 = np.zeros(self.T + 1)
        # alpha[0] = 1 makes the t = 1 entry vanish
        self.sigma2[1:] = self.beta[1:] * (1.0 - self.alpha[:-1]) / (1.0 - self.alpha[1:])
        self.beta_prime = self.sigma2.copy()
        self.beta_prime[1] = self.beta[1]
        for table in (self.beta, self.alpha, self.sigma2, self.beta_prime):
            table.setflags(write=False)

    @staticmethod
    def _check_init(betas: np.ndarray):
        if betas.size < 2:
            raise InvalidScheduleError("A schedule needs T >= 2 steps.")
        if not np.all(np.isfinite(betas)) or np.any(betas <= 0) or np.any(betas >= 1):
            raise InvalidScheduleError("Every beta must lie in the open interval (0, 1).")

    def check_step(self, t: int, first: int = 1) -> int:
        """
        Returns t as an int, or raises InvalidArgumentError when it lies outside [first, T].
        """
        if int(t) != t or not first <= t <= self.T:
            raise InvalidArgumentError(f"The value of 't' must be an integer in [{first}, {self.T}].")
        return int(t)

    def posterior_variance(self, t: int) -> float:
        """
        Variance of the Gaussian ELBO term at step t: sigma2_t for t >= 2 and beta_1 at t = 1.
        """
        return float(self.beta_prime[self.check_step(t)])

    def to_dict(self) -> dict:
        return {"T": self.T, "betas": self.beta[1:].tolist()}

    @classmethod
    def from_dict(cls, record: dict) -> "DiffusionSchedule":
        betas = record["betas"]
        if len(betas) != record.get("T", len(betas)):
            raise InvalidScheduleError("The number of betas does not match T.")
        return cls(betas)

    def __repr__(self) -> str:
        return f"DiffusionSchedule(T={self.T}, beta=[{self.beta[1]:.3g} .. {self.beta[-1]:.3g}], alpha_T={self.alpha[-1]:.3g})"


def make_schedule(T: int = DEFAULT_T, beta_spec: Union[float, Tuple[float, float]] = DEFAULT_BETAS) -> DiffusionSchedule:
    """
    Builds a schedule from a constant beta or a linear ramp (lo, hi) over t = 1..T.

    Parameters
    ----------
    T: int (default=50)
        The number of steps (at least 2)
    beta_spec: float, tuple (default=(1e-4, 0.05))
        A constant beta, or the pair (beta_1, beta_T) of a linear ramp
    """
    if int(T) != T or T < 2:
        raise InvalidScheduleError("The value of 'T' must be an integer >= 2.")
    if np.isscalar(beta_spec):
        betas = np.full(int(T), float(beta_spec))
    else:
        lo, hi = beta_spec
        betas = np.linspace(lo, hi, int(T))
    return DiffusionSchedule(betas)


class PosteriorParams:

    """
    Mean and (isotropic) variance of the Gaussian backward posterior q(z_{t-1}|z_t, x).
    """

    def __init__(self, mean: np.ndarray, variance: float):
        self.mean = mean
        self.variance = float(variance)

    def __repr__(self) -> str:
        return f"PosteriorParams(mean={np.array2string(np.asarray(self.mean), precision=4)}, variance={self.variance:.6g})"


def _broadcast(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=float)


def forward_marginal(s: DiffusionSchedule, x: np.ndarray, t: int, rng: Rng,
                     w: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draws z_t = sqrt(alpha_t) x + sqrt(1 - alpha_t) w with w ~ N(0, I) and returns (z_t, w).

    Parameters
    ----------
    s: DiffusionSchedule
        The schedule
    x: np.ndarray
        A data vector (K,) or a batch (n, K)
    t: int
        The step, in [1, T]
    rng: Rng
        The random number generator (its state advances; unused when w is given)
    w: np.ndarray (default=None)
        Frozen noise with the shape of x
    """
    t = s.check_step(t)
    x = _broadcast(x)
    if w is None:
        w = rng.normal(x.shape)
    return np.sqrt(s.alpha[t]) * x + np.sqrt(1.0 - s.alpha[t]) * w, w


def forward_step(s: DiffusionSchedule, z_prev: np.ndarray, t: int, rng: Rng) -> np.ndarray:
    """
    One step of the forward chain: z_t = sqrt(1 - beta_t) z_{t-1} + sqrt(beta_t) u.
    """
    t = s.check_step(t)
    z_prev = _broadcast(z_prev)
    return np.sqrt(1.0 - s.beta[t]) * z_prev + np.sqrt(s.beta[t]) * rng.normal(z_prev.shape)


def posterior_coefficients(s: DiffusionSchedule, t: int) -> Tuple[float, float]:
    """
    Coefficients (of z_t, of x) of the backward posterior mean at step t.
    """
    t = s.check_step(t)
    a_prev = s.alpha[t - 1]
    denom = 1.0 - s.alpha[t]
    return (1.0 - a_prev) * np.sqrt(1.0 - s.beta[t]) / denom, np.sqrt(a_prev) * s.beta[t] / denom


def posterior_mean(s: DiffusionSchedule, x: np.ndarray, z: np.ndarray, t: int) -> np.ndarray:
    """
    Mean m_t(x, z_t) of q(z_{t-1}|z_t, x); at t = 1 it reduces to x.
    """
    cz, cx = posterior_coefficients(s, t)
    return cz * _broadcast(z) + cx * _broadcast(x)


def backward_posterior(s: DiffusionSchedule, x: np.ndarray, z: np.ndarray, t: int) -> PosteriorParams:
    """
    The Gaussian q(z_{t-1}|z_t, x) = N(m_t(x, z_t), sigma2_t I) for 2 <= t <= T, with
    m_t = ((1 - alpha_{t-1}) sqrt(1 - beta_t) z_t + sqrt(alpha_{t-1}) beta_t x) / (1 - alpha_t) and
    sigma2_t = beta_t (1 - alpha_{t-1}) / (1 - alpha_t).

    Parameters
    ----------
    s: DiffusionSchedule
        The schedule
    x: np.ndarray
        The data point (or batch)
    z: np.ndarray
        The noisy point z_t (same shape as x)
    t: int
        The step, in [2, T]
    """
    t = s.check_step(t, first=2)
    return PosteriorParams(posterior_mean(s, x, z, t), s.sigma2[t])


def forward_score(s: DiffusionSchedule, x: np.ndarray, z: np.ndarray, t: int) -> np.ndarray:
    """
    Score of the forward marginal in z: grad_z ln g(z_t|x) = -(z_t - sqrt(alpha_t) x) / (1 - alpha_t).
    """
    t = s.check_step(t)
    return -(_broadcast(z) - np.sqrt(s.alpha[t]) * _broadcast(x)) / (1.0 - s.alpha[t])


def tweedie_mean(s: DiffusionSchedule, x: np.ndarray, z: np.ndarray, t: int) -> np.ndarray:
    """
    The backward posterior mean written through the forward score:
    m_t(x, z_t) = (z_t + beta_t grad ln g(z_t|x)) / sqrt(1 - beta_t).
    """
    t = s.check_step(t)
    return (_broadcast(z) + s.beta[t] * forward_score(s, x, z, t)) / np.sqrt(1.0 - s.beta[t])
