"""
Two-player value functions evaluated over discrete (p, q). Every payoff is separable over the
alphabet, V(d) = SUM_x payoff(d(x), p(x), q(x)), so the maximising discriminator is found one
point at a time.
"""
from typing import Optional, Tuple

import numpy as np

from genlearn.divergence.pmf import Pmf, check_alphabets
from genlearn.numcore.optimize import maximize_scalar
from genlearn.utils.exceptions import InvalidArgumentError

# discriminator range per game (closed bounds used by the search; open ends are approached)
RANGES = {"gan_log": (0.0, 1.0),
          "fgan_a": (-0.5, 0.5),
          "fgan_b": (-np.inf, np.inf),
          "fgan_c": (-np.inf, 1.0)}

# finite box used when searching an unbounded range
SEARCH_BOX = {"gan_log": (1e-12, 1 - 1e-12),
              "fgan_a": (-0.5, 0.5),
              "fgan_b": (-1e3, 1e3),
              "fgan_c": (-1e3, 1 - 1e-9)}


class GameSpec:

    """
    A separable two-player value function: its payoff tag and the discriminator range it imposes.
    """

    def __init__(self, tag: str, gamma: Optional[float] = None):
        """
        A separable two-player value function.

        Parameters
        ----------
        tag: str
            One of 'gan_log' (p log2 d + q log2(1-d), d in (0,1)), 'fgan_a' (p d - gamma q d,
            |d| <= 1/2), 'fgan_b' (p d - q (d^2/4 + d), d real) and 'fgan_c' (p d - q d/(1-d), d < 1)
        gamma: float (default=None)
            The parameter of 'fgan_a' (defaults to 1)
        """
        if tag not in RANGES:
            raise InvalidArgumentError(f"The value of 'tag' must be in {{{', '.join(RANGES)}}}.")
        if tag == "fgan_a":
            gamma = 1.0 if gamma is None else float(gamma)
            if gamma <= 0:
                raise InvalidArgumentError("The value of 'gamma' must be positive.")
        self.tag = tag
        self.gamma = gamma
        self.d_range = RANGES[tag]

    def payoff(self, d: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """
        Per-point payoff of discriminator output(s) d at probabilities (p, q); zero-mass terms
        contribute 0 even where their logarithm would diverge.
        """
        d, p, q = np.broadcast_arrays(np.asarray(d, dtype=float), np.asarray(p, dtype=float),
                                      np.asarray(q, dtype=float))
        if self.tag == "gan_log":
            with np.errstate(divide="ignore", invalid="ignore"):
                a = np.where(p > 0, p * np.log2(d), 0.0)
                b = np.where(q > 0, q * np.log2(1 - d), 0.0)
            return a + b
        if self.tag == "fgan_a":
            return p * d - self.gamma * q * d
        if self.tag == "fgan_b":
            return p * d - q * (d ** 2 / 4 + d)
        return p * d - q * d / (1 - d)

    def closed_form(self, p: float, q: float) -> Tuple[float, float]:
        """
        Per-point maximiser and maximum (d*, value) of the payoff. The unbounded games report an
        infinite d* when the supremum is only approached.
        """
        if self.tag == "gan_log":
            if p + q == 0:
                return 0.5, 0.0
            d = p / (p + q)
            return d, float(self.payoff(d, p, q))
        if self.tag == "fgan_a":
            diff = p - self.gamma * q
            return 0.5 * np.sign(diff), 0.5 * abs(diff)
        if self.tag == "fgan_b":
            if q > 0:
                return 2 * (p - q) / q, (p - q) ** 2 / q
            return (np.inf, np.inf) if p > 0 else (0.0, 0.0)
        # fgan_c
        if p > 0:
            return 1 - np.sqrt(q / p), (np.sqrt(p) - np.sqrt(q)) ** 2
        return (-np.inf, q) if q > 0 else (0.0, 0.0)

    def search(self, p: float, q: float) -> Tuple[float, float]:
        """
        Per-point maximiser and maximum found by bounded golden-section search (tolerance 1e-10)
        inside a finite box of the discriminator range.
        """
        lo, hi = SEARCH_BOX[self.tag]
        return maximize_scalar(lambda d: float(self.payoff(d, p, q)), lo, hi, tol=1e-10)

    def __repr__(self) -> str:
        return self.tag if self.gamma is None else f"{self.tag}({self.gamma:g})"


def game_value(p: Pmf, q: Pmf, game: GameSpec, method: str = "closed_form") -> Tuple[float, np.ndarray]:
    """
    Maximum of a separable value function over per-point discriminator outputs, together with
    the maximising discriminator. For 'gan_log' the maximiser is p/(p+q) and the value equals
    D(p||m) + D(q||m) - 2 bits with m = (p+q)/2.

    Parameters
    ----------
    p: Pmf
        The data pmf
    q: Pmf
        The model pmf
    game: GameSpec
        The value function
    method: str (default="closed_form")
        'closed_form' or 'search' (per-point bounded search; used to cross-check closed forms)
    """
    check_alphabets(p, q)
    if method not in ("closed_form", "search"):
        raise InvalidArgumentError("The value of 'method' must be in {closed_form, search}.")
    solve = game.closed_form if method == "closed_form" else game.search
    d_star = np.empty(len(p))
    value = 0.0
    for i, (pi, qi) in enumerate(zip(p.probs, q.probs)):
        d_star[i], v = solve(pi, qi)
        value += v
    return float(value), d_star
