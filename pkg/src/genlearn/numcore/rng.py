import hashlib
from typing import Sequence, Union

import numpy as np

from genlearn.utils.exceptions import InvalidArgumentError

Shape = Union[int, Sequence[int]]


def _purpose_key(purpose: str) -> int:
    """
    Maps a purpose string onto a stable 64-bit integer (sha256 prefix).
    """
    digest = hashlib.sha256(purpose.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


class Rng:

    """
    Seedable 64-bit random number generator (numpy's PCG64 bit generator). Sub-streams are keyed
    by a purpose string: two streams with the same (seed, purpose) produce the same numbers, and
    creating a new stream never perturbs the draws of the existing ones.
    """

    def __init__(self, seed: int, purpose: str = "root"):
        """
        Seedable 64-bit random number generator keyed by (seed, purpose).

        Parameters
        ----------
        seed: int
            The root seed, in [0, 2**64)
        purpose: str (default="root")
            The name of the stream

        Attributes
        ----------
        generator: np.random.Generator
            The underlying numpy generator (PCG64)
        """
        if int(seed) != seed or not 0 <= seed < 2 ** 64:
            raise InvalidArgumentError("The value of 'seed' must be an integer in [0, 2**64).")
        self.seed = int(seed)
        self.purpose = purpose
        sequence = np.random.SeedSequence(entropy=[self.seed, _purpose_key(purpose)])
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def substream(self, purpose: str) -> "Rng":
        """
        Returns an independent stream derived from this one's seed and purpose.

        Parameters
        ----------
        purpose: str
            The name of the derived stream
        """
        return Rng(self.seed, f"{self.purpose}/{purpose}")

    def uniform(self, size: Shape = None) -> Union[float, np.ndarray]:
        """
        Draws uniform variates in [0, 1).
        """
        return self.generator.random(size)

    def integers(self, high: int, size: Shape = None) -> Union[int, np.ndarray]:
        """
        Draws integers uniformly from {0, ..., high-1}.
        """
        return self.generator.integers(0, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        """
        Returns a random permutation of range(n).
        """
        return self.generator.permutation(n)

    def normal(self, shape: Shape) -> np.ndarray:
        """
        Draws i.i.d. standard-normal variates with the Box-Muller transform of uniform pairs.

        Parameters
        ----------
        shape: int, tuple
            The shape of the output array
        """
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        size = int(np.prod(shape))
        if size == 0:
            return np.zeros(shape)
        pairs = (size + 1) // 2
        # 1 - U lies in (0, 1], so the logarithm is finite
        u1 = 1.0 - self.generator.random(pairs)
        u2 = self.generator.random(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        z = np.concatenate((radius * np.cos(angle), radius * np.sin(angle)))
        return z[:size].reshape(shape)

    def categorical(self, probs: np.ndarray) -> int:
        """
        Draws one index from a probability vector (inverse-CDF method).

        Parameters
        ----------
        probs: np.ndarray
            A probability vector
        """
        cdf = np.cumsum(probs)
        u = self.generator.random() * cdf[-1]
        idx = int(np.searchsorted(cdf, u, side="right"))
        # guard against u landing on the last boundary through rounding
        return min(idx, len(probs) - 1)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, purpose={self.purpose!r})"


def as_rng(rng: Union["Rng", int]) -> Rng:
    """
    Returns 'rng' unchanged if it is an Rng, otherwise builds a root Rng from the integer seed.
    """
    return rng if isinstance(rng, Rng) else Rng(rng)


def sample_std_normal(rng: Rng, dim: int) -> np.ndarray:
    """
    Draws a vector of 'dim' i.i.d. standard-normal variates.

    Parameters
    ----------
    rng: Rng
        The random number generator (its state advances)
    dim: int
        The length of the vector
    """
    if dim < 1:
        raise InvalidArgumentError("The value of 'dim' must be a positive integer.")
    return rng.normal(dim)
