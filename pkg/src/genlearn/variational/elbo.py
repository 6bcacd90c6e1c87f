"""
Evidence lower bound bookkeeping. Every value is in nats; 'ElboReport.in_bits' converts at the
reporting boundary.
"""
from typing import Optional

import numpy as np

from genlearn.divergence.pmf import Pmf
from genlearn.metrics.cross_entropy import NATS_PER_BIT
from genlearn.mixture.gmm import GmmParams, gmm_logpdf
from genlearn.statistics.gaussian import mvn_logpdf
from genlearn.utils.exceptions import InvalidArgumentError


class ElboReport:

    """
    ELBO = reconstruction - kl, optionally with the exact log-likelihood (and then the gap
    loglik - elbo, which is the relative entropy between the variational and the true posterior).
    """

    def __init__(self, reconstruction: float, kl: float, loglik: Optional[float] = None, unit: str = "nats"):
        self.reconstruction = float(reconstruction)
        self.kl = float(kl)
        self.elbo = self.reconstruction - self.kl
        self.loglik = None if loglik is None else float(loglik)
        self.unit = unit

    @property
    def gap(self) -> Optional[float]:
        return None if self.loglik is None else self.loglik - self.elbo

    def in_bits(self) -> "ElboReport":
        if self.unit == "bits":
            return self
        loglik = None if self.loglik is None else self.loglik / NATS_PER_BIT
        return ElboReport(self.reconstruction / NATS_PER_BIT, self.kl / NATS_PER_BIT, loglik, unit="bits")

    def to_dict(self) -> dict:
        record = {"elbo": self.elbo, "reconstruction": self.reconstruction, "kl": self.kl, "unit": self.unit}
        if self.loglik is not None:
            record.update(loglik=self.loglik, gap=self.gap)
        return record

    def __repr__(self) -> str:
        extra = "" if self.loglik is None else f", gap={self.gap:.3g}"
        return f"ElboReport(elbo={self.elbo:.6g} {self.unit}, kl={self.kl:.6g}{extra})"


def gaussian_kl_std(mu: np.ndarray, var: np.ndarray) -> float:
    """
    Relative entropy (nats) of N(mu, diag(var)) from the standard normal:
    1/2 SUM_k (mu_k^2 + var_k - 1 - ln var_k).

    Parameters
    ----------
    mu: np.ndarray
        The means
    var: np.ndarray
        The variances (all positive)
    """
    mu = np.asarray(mu, dtype=float)
    var = np.asarray(var, dtype=float)
    if np.any(var <= 0):
        raise InvalidArgumentError("The variances must be positive.")
    return float(0.5 * np.sum(mu ** 2 + var - 1.0 - np.log(var)))


def elbo_tractable(model: GmmParams, x: np.ndarray, g: Pmf) -> ElboReport:
    """
    ELBO of a Gaussian mixture at one point for a variational pmf g over the components:
    E_g[ln f(x|Z)] - D(g||pi), together with the exact ln f(x).

    Parameters
    ----------
    model: GmmParams
        The mixture (the latent variable is the component index)
    x: np.ndarray
        The observation
    g: Pmf
        The variational pmf over the d components
    """
    if len(g) != model.d:
        raise InvalidArgumentError(f"The variational pmf must cover the {model.d} components.")
    x = np.asarray(x, dtype=float).reshape(1, -1)
    cond = np.array([mvn_logpdf(x, model.means[j], model.covs[j])[0] for j in range(model.d)])
    support = g.probs > 0
    reconstruction = float(np.sum(g.probs[support] * cond[support]))
    if np.any(model.weights[support] == 0):
        kl = np.inf
    else:
        ps = g.probs[support]
        kl = float(np.sum(ps * np.log(ps / model.weights[support])))
    return ElboReport(reconstruction, kl, loglik=float(gmm_logpdf(model, x)[0]))
