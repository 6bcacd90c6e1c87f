"""
The mean-matching ELBO terms of a diffusion model rewritten as denoising score matching. With
s_theta(z_t) = (sqrt(1 - beta_t) mu_t(z_t) - z_t) / beta_t, the per-step term
||m_t - mu_t||^2 / (2 sigma2_t) equals beta_t^2 / (2 sigma2_t (1 - beta_t)) ||s_theta - grad ln g||^2,
so the two objectives differ by a constant that does not depend on the network.
"""
from typing import Tuple

import numpy as np

from genlearn.diffusion.denoiser import mean_from_output
from genlearn.diffusion.schedule import DiffusionSchedule, forward_marginal, forward_score, posterior_mean
from genlearn.numcore.rng import Rng


def score_from_mean(s: DiffusionSchedule, mu: np.ndarray, z: np.ndarray, t: int) -> np.ndarray:
    """
    The score estimate implied by a backward mean: (sqrt(1 - beta_t) mu_t - z_t) / beta_t.
    """
    return (np.sqrt(1.0 - s.beta[t]) * mu - z) / s.beta[t]


def score_matching_losses(net, s: DiffusionSchedule, x: np.ndarray, rng: Rng,
                          n_samples: int = 16) -> Tuple[float, float]:
    """
    Returns (mean-matching loss, score-matching loss) summed over t = 2..T and averaged over
    'n_samples' forward draws per data row; both losses see the same draws.

    Parameters
    ----------
    net: DenoiserNet
        The denoiser (or any object with 'mode' and 'output')
    s: DiffusionSchedule
        The schedule
    x: np.ndarray
        A data vector (K,) or a batch (n, K)
    rng: Rng
        Source of the shared forward noise
    n_samples: int (default=16)
        Forward draws per row and step
    """
    x = np.repeat(np.atleast_2d(np.asarray(x, dtype=float)), n_samples, axis=0)
    mean_loss, score_loss = 0.0, 0.0
    for t in range(2, s.T + 1):
        z, _ = forward_marginal(s, x, t, rng)
        mu = mean_from_output(s, net.mode, np.atleast_2d(net.output(s, z, t)), z, t)
        sigma2, beta = s.sigma2[t], s.beta[t]
        mean_loss += np.mean(np.sum((posterior_mean(s, x, z, t) - mu) ** 2, axis=1)) / (2 * sigma2)
        diff = score_from_mean(s, mu, z, t) - forward_score(s, x, z, t)
        score_loss += beta ** 2 / (2 * sigma2 * (1 - beta)) * np.mean(np.sum(diff ** 2, axis=1))
    return float(mean_loss), float(score_loss)


def elbo_score_gap(net, s: DiffusionSchedule, x: np.ndarray, rng: Rng, n_samples: int = 16) -> float:
    """
    Mean-matching loss minus score-matching loss on shared draws. The gap is the same for every
    network (zero up to rounding for this weighting).
    """
    mean_loss, score_loss = score_matching_losses(net, s, x, rng, n_samples)
    return mean_loss - score_loss
