import warnings
from typing import Sequence

import numpy as np

from genlearn.data.dataset import SequenceDataset
from genlearn.utils.exceptions import ContextTooLargeError, InvalidArgumentError, InvalidModelError

MAX_ORDER = 4
# largest number of table rows accepted, whatever the order
MAX_ROWS = 10 ** 7


def context_index(context: Sequence[int], V: int) -> int:
    """
    Encodes a context (oldest symbol first, the pad symbol V allowed) as a base-(V+1) integer.
    """
    index = 0
    for s in context:
        index = index * (V + 1) + int(s)
    return index


def padded_contexts(seq: np.ndarray, V: int, width: int) -> np.ndarray:
    """
    Returns the (K, width) matrix whose row k holds the 'width' symbols preceding position k,
    with the pad symbol V standing in before the start of the sequence.

    Parameters
    ----------
    seq: np.ndarray
        A symbol sequence of length K
    V: int
        The alphabet size (also the pad symbol)
    width: int
        The context width
    """
    seq = np.asarray(seq, dtype=int)
    padded = np.concatenate((np.full(width, V), seq))
    return np.array([padded[k:k + width] for k in range(len(seq))], dtype=int).reshape(len(seq), width)


class MarkovModel:

    """
    Markov model of order m over the alphabet {0, ..., V-1}: one conditional pmf (a table row) per
    context of m preceding symbols. Contexts at the start of a sequence are completed with the pad
    symbol V, so p(x_1) is a genuine row of the table.
    """

    def __init__(self, order: int, tables: np.ndarray, V: int, alpha: float = 1.0):
        """
        Markov model of order m.

        Parameters
        ----------
        order: int
            The order m (number of conditioning symbols)
        tables: np.ndarray
            Conditional pmfs ((V+1)^m, V), one row per encoded context
        V: int
            The alphabet size
        alpha: float (default=1.0)
            The additive smoothing constant used by the fit
        """
        tables = np.array(tables, dtype=float)
        self._check_init(order, tables, V)
        self.order = int(order)
        self.tables = tables
        self.V = int(V)
        self.alpha = float(alpha)

    @staticmethod
    def _check_init(order: int, tables: np.ndarray, V: int):
        if tables.shape != ((V + 1) ** order, V):
            raise InvalidModelError(f"The tables of an order-{order} model over {V} symbols must have shape "
                                    f"({(V + 1) ** order}, {V}).")
        if np.any(tables < 0) or not np.allclose(tables.sum(axis=1), 1.0, rtol=0, atol=1e-12):
            raise InvalidModelError("Every row of 'tables' must be a pmf.")

    def conditional(self, context: Sequence[int]) -> np.ndarray:
        """
        Returns p(. | context) for a context of exactly 'order' symbols (pad symbol allowed).
        """
        if len(context) != self.order:
            raise InvalidArgumentError(f"The context must hold {self.order} symbol(s).")
        return self.tables[context_index(context, self.V)]

    def conditional_probs(self, seq: np.ndarray) -> np.ndarray:
        """
        Returns the (K, V) matrix whose row k is p(. | x_1, ..., x_{k-1}) for a sequence of length K.
        """
        contexts = padded_contexts(seq, self.V, self.order)
        index = contexts @ ((self.V + 1) ** np.arange(self.order - 1, -1, -1)) if self.order else np.zeros(len(seq), int)
        return self.tables[index]

    def next_probs(self, prefix: Sequence[int]) -> np.ndarray:
        """
        Returns p(. | prefix): the conditional pmf of the symbol that follows 'prefix'.
        """
        tail = list(prefix[max(0, len(prefix) - self.order):])
        return self.conditional([self.V] * (self.order - len(tail)) + tail)

    def to_dict(self) -> dict:
        return {"order": self.order, "V": self.V, "alpha": self.alpha, "tables": self.tables.tolist()}

    @classmethod
    def from_dict(cls, record: dict) -> "MarkovModel":
        return cls(record["order"], np.array(record["tables"]), record["V"], record.get("alpha", 1.0))

    def __repr__(self) -> str:
        return f"MarkovModel(order={self.order}, V={self.V}, alpha={self.alpha:g})"


def _reachable(order: int, V: int) -> np.ndarray:
    """
    Marks the contexts that can occur in a padded sequence (pads only before the first symbol).
    """
    if order == 0:
        return np.ones(1, dtype=bool)
    digits = np.array(np.unravel_index(np.arange((V + 1) ** order), (V + 1,) * order)).T.reshape(-1, order)
    is_pad = digits == V
    # once a real symbol appears, no pad may follow
    seen_symbol = np.cumsum(~is_pad, axis=1) > 0
    return ~np.any(is_pad & seen_symbol, axis=1)


def fit_markov(ds: SequenceDataset, order: int, alpha: float = 1.0) -> MarkovModel:
    """
    Estimates every conditional pmf of an order-m Markov model by additive smoothing of frequency
    counts: table[context][s] = (count + alpha) / (total + alpha V). With alpha = 0, contexts never
    seen in the data get the uniform pmf.

    Parameters
    ----------
    ds: SequenceDataset
        The training sequences
    order: int
        The order m (0 <= m <= 4)
    alpha: float (default=1.0)
        The additive smoothing constant (>= 0)
    """
    if order < 0 or int(order) != order:
        raise InvalidArgumentError("The value of 'order' must be a non-negative integer.")
    if alpha < 0:
        raise InvalidArgumentError("The value of 'alpha' must be non-negative.")
    V = ds.V
    if order > MAX_ORDER or (V + 1) ** order > MAX_ROWS:
        raise ContextTooLargeError(f"An order-{order} model over {V} symbols needs {(V + 1) ** order} contexts.")
    counts = np.zeros(((V + 1) ** order, V))
    powers = (V + 1) ** np.arange(order - 1, -1, -1)
    for seq in ds:
        index = padded_contexts(seq, V, order) @ powers if order else np.zeros(len(seq), dtype=int)
        np.add.at(counts, (index, seq), 1)
    smoothed = counts + alpha
    totals = smoothed.sum(axis=1, keepdims=True)
    empty = totals[:, 0] == 0
    if np.any(empty & _reachable(order, V)):
        w_msg = f"{int(np.sum(empty & _reachable(order, V)))} context(s) never observed; using the uniform pmf."
        warnings.warn(w_msg, Warning)
    tables = np.where(empty[:, None], 1.0 / V, smoothed / np.where(totals == 0, 1.0, totals))
    return MarkovModel(order, tables, V, alpha)


def uniform_markov(V: int) -> MarkovModel:
    """
    Returns the order-0 model that gives every symbol probability 1/V.
    """
    return MarkovModel(0, np.full((1, V), 1.0 / V), V, alpha=0.0)
