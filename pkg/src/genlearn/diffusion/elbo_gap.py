"""
A one-dimensional diffusion model whose backward means are linear, mu_t(z) = a_t z + b_t. Every
quantity of the likelihood/ELBO decomposition is then Gaussian and available in closed form.
"""
import numpy as np

from genlearn.diffusion.denoiser import LinearDenoiser
from genlearn.diffusion.schedule import DiffusionSchedule, posterior_coefficients
from genlearn.statistics.gaussian import LOG_2PI
from genlearn.variational.elbo import gaussian_kl_std


class ElboGapReport:

    """
    The three ELBO term groups of a tractable model, the ELBO they add up to, the same ELBO
    computed directly from the joint moments of the forward chain, and the exact log-likelihood.
    Every value is in nats.
    """

    def __init__(self, reconstruction: float, prior_kl: float, step_kls: np.ndarray, elbo_direct: float,
                 loglik: float):
        self.reconstruction = float(reconstruction)
        self.prior_kl = float(prior_kl)
        self.step_kls = np.asarray(step_kls, dtype=float)
        self.elbo = self.reconstruction - self.prior_kl - float(np.sum(self.step_kls))
        self.elbo_direct = float(elbo_direct)
        self.loglik = float(loglik)

    @property
    def gap(self) -> float:
        return self.loglik - self.elbo

    def to_dict(self) -> dict:
        return {"reconstruction": self.reconstruction,
                "prior_kl": self.prior_kl,
                "step_kl": float(np.sum(self.step_kls)),
                "elbo": self.elbo,
                "elbo_direct": self.elbo_direct,
                "loglik": self.loglik,
                "gap": self.gap}

    def __repr__(self) -> str:
        return f"ElboGapReport(elbo={self.elbo:.6g}, loglik={self.loglik:.6g}, gap={self.gap:.3g})"


def _gaussian_loglik(x: float, mean: float, var: float) -> float:
    return -0.5 * (LOG_2PI + np.log(var) + (x - mean) ** 2 / var)


def model_loglik(model: LinearDenoiser, s: DiffusionSchedule, x: float) -> float:
    """
    Exact ln f(x) of the linear model: propagate the mean and variance of z_T ~ N(0, 1) through
    z_{t-1} = a_t z_t + b_t + sqrt(beta'_t) u.
    """
    mean, var = 0.0, 1.0
    for t in range(s.T, 0, -1):
        mean = model.a[t] * mean + model.b[t]
        var = model.a[t] ** 2 * var + s.beta_prime[t]
    return _gaussian_loglik(x, mean, var)


def _expected_sq(c_prev: float, v_prev: float, c_t: float, v_t: float, cov: float, a: float, b: float) -> float:
    """
    E[(z_{t-1} - a z_t - b)^2] for jointly Gaussian (z_{t-1}, z_t).
    """
    return (c_prev - a * c_t - b) ** 2 + v_prev + a ** 2 * v_t - 2 * a * cov


def tractable_elbo_gap(model: LinearDenoiser, s: DiffusionSchedule, x: float) -> ElboGapReport:
    """
    ELBO of a 1-D observation under the linear model, as
    E[ln f(x|z_1)] - D(g(z_T|x) || N(0, 1)) - SUM_{t>=2} E[D(q(z_{t-1}|z_t, x) || f(z_{t-1}|z_t))],
    cross-checked against the direct expectation E_q[ln f(x, z_{1:T}) - ln q(z_{1:T}|x)], and the
    exact ln f(x). The gap ln f(x) - ELBO is non-negative.

    Parameters
    ----------
    model: LinearDenoiser
        The backward slopes and offsets
    s: DiffusionSchedule
        The schedule
    x: float
        The observation
    """
    x = float(x)
    T = s.T
    # moments of z_t given x; z_0 = x
    c = np.sqrt(s.alpha) * x
    v = 1.0 - s.alpha
    a, b = model.a, model.b
    reconstruction = -0.5 * (LOG_2PI + np.log(s.beta[1])) - ((x - a[1] * c[1] - b[1]) ** 2 + a[1] ** 2 * v[1]) / (2 * s.beta[1])
    prior_kl = gaussian_kl_std([c[T]], [v[T]])
    step_kls = np.zeros(T - 1)
    for t in range(2, T + 1):
        cz, cx = posterior_coefficients(s, t)
        slope, offset = cz - a[t], cx * x - b[t]
        step_kls[t - 2] = ((slope * c[t] + offset) ** 2 + slope ** 2 * v[t]) / (2 * s.sigma2[t])
    # direct route through the forward chain: Cov(z_{t-1}, z_t) = sqrt(1 - beta_t) v_{t-1}
    elbo_direct = -0.5 * (LOG_2PI + c[T] ** 2 + v[T])
    for t in range(1, T + 1):
        cov = np.sqrt(1.0 - s.beta[t]) * v[t - 1]
        sq = _expected_sq(c[t - 1], v[t - 1], c[t], v[t], cov, a[t], b[t])
        elbo_direct += -0.5 * (LOG_2PI + np.log(s.beta_prime[t])) - sq / (2 * s.beta_prime[t])
        # minus E ln q(z_t|z_{t-1})
        elbo_direct += 0.5 * (LOG_2PI + np.log(s.beta[t])) + 0.5
    return ElboGapReport(reconstruction, prior_kl, step_kls, elbo_direct, model_loglik(model, s, x))
