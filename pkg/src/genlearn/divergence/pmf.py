import numpy as np

from genlearn.numcore.rng import Rng
from genlearn.utils.exceptions import InvalidArgumentError

PMF_TOL = 1e-12


class Pmf:

    """
    Probability mass function over an indexed finite alphabet {0, ..., |X|-1}.
    """

    def __init__(self, probs: np.ndarray):
        """
        Probability mass function over an indexed finite alphabet.

        Parameters
        ----------
        probs: np.ndarray
            Non-negative probabilities summing to 1 (within 1e-12)
        """
        probs = np.array(probs, dtype=float).ravel()
        self._check_init(probs)
        probs.setflags(write=False)
        self.probs = probs

    @staticmethod
    def _check_init(probs: np.ndarray):
        if probs.size == 0:
            raise InvalidArgumentError("A Pmf needs a non-empty alphabet.")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise InvalidArgumentError("The entries of 'probs' must be finite and non-negative.")
        if abs(probs.sum() - 1.0) > PMF_TOL:
            raise InvalidArgumentError(f"The entries of 'probs' must sum to 1 (got {probs.sum()!r}).")

    @classmethod
    def normalized(cls, weights: np.ndarray) -> "Pmf":
        """
        Builds a Pmf by normalizing a vector of non-negative weights.
        """
        weights = np.asarray(weights, dtype=float)
        total = weights.sum()
        if total <= 0:
            raise InvalidArgumentError("The weights must have a positive sum.")
        return cls(weights / total)

    @classmethod
    def uniform(cls, size: int) -> "Pmf":
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def random(cls, rng: Rng, size: int, sparsity: float = 0.0) -> "Pmf":
        """
        Draws a random Pmf: uniform weights, a fraction 'sparsity' of which is zeroed.

        Parameters
        ----------
        rng: Rng
            The random number generator
        size: int
            The alphabet size
        sparsity: float (default=0.0)
            Probability of zeroing each entry (at least one entry is always kept)
        """
        weights = rng.uniform(size)
        if sparsity > 0:
            keep = rng.uniform(size) >= sparsity
            keep[rng.integers(size)] = True
            weights = weights * keep
        return cls.normalized(weights)

    def __len__(self) -> int:
        return self.probs.size

    def __repr__(self) -> str:
        return f"Pmf({np.array2string(self.probs, precision=4)})"


class Channel:

    """
    Row-stochastic transition matrix p(y|x): rows indexed by x, columns by y.
    """

    def __init__(self, transition: np.ndarray):
        """
        Row-stochastic transition matrix p(y|x).

        Parameters
        ----------
        transition: np.ndarray
            Matrix (|X|, |Y|) whose rows are pmfs
        """
        transition = np.array(transition, dtype=float)
        if transition.ndim != 2:
            raise InvalidArgumentError("The value of 'transition' must be a matrix.")
        # every row must be a valid pmf
        for row in transition:
            Pmf(row)
        transition.setflags(write=False)
        self.transition = transition

    @classmethod
    def identity(cls, size: int) -> "Channel":
        return cls(np.eye(size))

    @classmethod
    def constant(cls, n_inputs: int, output: Pmf) -> "Channel":
        """
        A channel whose output ignores its input (every row equal to 'output').
        """
        return cls(np.tile(output.probs, (n_inputs, 1)))

    @classmethod
    def random(cls, rng: Rng, n_inputs: int, n_outputs: int) -> "Channel":
        weights = rng.uniform((n_inputs, n_outputs))
        return cls(weights / weights.sum(axis=1, keepdims=True))

    @property
    def shape(self):
        return self.transition.shape


def check_alphabets(p: Pmf, q: Pmf) -> None:
    """
    Raises InvalidArgumentError when two pmfs live on alphabets of different sizes.
    """
    if len(p) != len(q):
        raise InvalidArgumentError(f"Alphabet mismatch: {len(p)} != {len(q)}.")
