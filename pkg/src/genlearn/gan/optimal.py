"""
The optimal discriminator of the GAN value function on finite alphabets, checked against the
divergence identities it implies.
"""
import numpy as np

from genlearn.divergence.game import GameSpec, game_value
from genlearn.divergence.measures import mixture_midpoint, relative_entropy
from genlearn.divergence.pmf import Pmf
from genlearn.utils.exceptions import AccuracyFailureError

CHECK_TOL = 1e-10
SEARCH_TOL = 1e-6


class OptimalDiscriminatorReport:

    """
    Result of 'optimal_discriminator_check' (values in bits).

    Attributes
    ----------
    d_star: np.ndarray
        The per-point maximiser p/(p+q) (1/2 where both masses vanish)
    value: float
        The maximum of the value function
    divergence_value: float
        D(p||m) + D(q||m) - 2 with m = (p+q)/2
    search_value: float
        The maximum found by per-point bounded search
    stationarity: float
        Largest |p/d* - q/(1-d*)| over points where 0 < d* < 1
    """

    def __init__(self, d_star: np.ndarray, value: float, divergence_value: float, search_value: float,
                 stationarity: float):
        self.d_star = d_star
        self.value = value
        self.divergence_value = divergence_value
        self.search_value = search_value
        self.stationarity = stationarity

    def to_dict(self) -> dict:
        return {"d_star": self.d_star.tolist(),
                "value": self.value,
                "divergence_value": self.divergence_value,
                "search_value": self.search_value,
                "stationarity": self.stationarity}

    def __repr__(self) -> str:
        return f"OptimalDiscriminatorReport(value={self.value:.6g} bits, search_gap={self.value - self.search_value:.2g})"


def optimal_discriminator_check(p: Pmf, q: Pmf) -> OptimalDiscriminatorReport:
    """
    Solves the GAN value function for a fixed pair (p, q) and checks that the maximiser is
    p/(p+q), that it satisfies the first-order condition p/d = q/(1-d), that the maximum equals
    D(p||m) + D(q||m) - 2 bits and that a per-point search does not beat it. Raises
    AccuracyFailureError when a check fails.

    Parameters
    ----------
    p: Pmf
        The data pmf
    q: Pmf
        The model pmf
    """
    game = GameSpec("gan_log")
    value, d_star = game_value(p, q, game)
    search_value, _ = game_value(p, q, game, method="search")
    m = mixture_midpoint(p, q)
    divergence_value = relative_entropy(p, m) + relative_entropy(q, m) - 2.0
    total = p.probs + q.probs
    expected = np.where(total > 0, p.probs / np.where(total > 0, total, 1.0), 0.5)
    interior = (d_star > 0) & (d_star < 1)
    residual = p.probs[interior] / d_star[interior] - q.probs[interior] / (1 - d_star[interior])
    stationarity = float(np.max(np.abs(residual))) if residual.size else 0.0
    report = OptimalDiscriminatorReport(d_star, value, divergence_value, search_value, stationarity)
    if np.max(np.abs(d_star - expected)) > CHECK_TOL:
        raise AccuracyFailureError("The maximiser differs from p/(p+q).")
    if abs(value - divergence_value) > CHECK_TOL or stationarity > CHECK_TOL:
        raise AccuracyFailureError("The optimal value does not match the divergence identity.")
    if search_value > value + SEARCH_TOL or value - search_value > SEARCH_TOL:
        raise AccuracyFailureError("The per-point search disagrees with the closed form.")
    return report
