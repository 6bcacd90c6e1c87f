from typing import List, Tuple

import numpy as np
import pandas as pd

from genlearn.utils.exceptions import InvalidArgumentError


class Dataset:

    """
    Tabular dataset for supervised learning: a matrix of raw input features (X, one example per
    row, no intercept column) and an optional target vector (y) holding real targets or class
    indices in {0, ..., M-1}.
    """

    def __init__(self, X: np.ndarray, y: np.ndarray = None, features: list = None, label: str = None):
        """
        Tabular dataset for supervised learning.

        Parameters
        ----------
        X: np.ndarray
            The matrix containing the dataset's feature vector(s)
        y: np.ndarray (default=None)
            The target vector (or a target matrix for multi-output regression)
        features: list (default=None)
            The name(s) of the feature(s)
        label: str (default=None)
            The name of the target
        """
        X = np.asarray(X, dtype=float)
        # a single feature defaults to a one-dimensional array
        X = X if X.ndim > 1 else np.reshape(X, (-1, 1))
        y = None if y is None else np.asarray(y)
        # check dimensions
        self._check_init(X, y, features)
        # parameters
        self.X = X
        self.y = y
        self.features = [f"x{i+1}" for i in range(X.shape[1])] if features is None else list(features)
        self.label = ("y" if label is None else label) if y is not None else None

    @staticmethod
    def _check_init(X: np.ndarray, y: np.ndarray, features: list):
        """
        Checks whether the dimensions of the arrays it takes as parameters are correct.

        Parameters
        ----------
        X: np.ndarray
            The matrix containing the dataset's feature vector(s)
        y: np.ndarray
            The target vector
        features: list
            The name(s) of the feature(s)
        """
        if not np.all(np.isfinite(X)):
            raise InvalidArgumentError("The entries of 'X' must be finite.")
        if y is not None and X.shape[0] != y.shape[0]:
            e_msg = f"dim 0 of 'X' ({X.shape[0]},) does not match dim 0 of 'y' ({y.shape[0]},)."
            raise InvalidArgumentError(e_msg)
        if features is not None and X.shape[1] != len(features):
            raise InvalidArgumentError("The number of features in 'X' must be equal to len(features).")

    def shape(self) -> Tuple[int, int]:
        """
        Returns a two-element tuple consisting of the dataset's dimensions.
        """
        return self.X.shape

    def has_label(self) -> bool:
        """
        Returns a boolean value representative of the presence of a target.
        """
        return self.y is not None

    def class_indices(self, n_classes: int = None) -> np.ndarray:
        """
        Returns the targets as an integer vector, checking that every entry is a class index.

        Parameters
        ----------
        n_classes: int (default=None)
            The number of classes M (None -> 1 + the largest index)
        """
        if self.y is None:
            raise InvalidArgumentError("The parameter 'y' was set to 'None'.")
        idx = np.asarray(self.y)
        if idx.ndim != 1 or np.any(idx != np.round(idx)) or np.any(idx < 0):
            raise InvalidArgumentError("The targets must be a vector of non-negative class indices.")
        idx = idx.astype(int)
        if n_classes is not None and idx.size and idx.max() >= n_classes:
            raise InvalidArgumentError(f"Class indices must be smaller than {n_classes}.")
        return idx

    def augmented(self) -> np.ndarray:
        """
        Returns the design matrix with a leading column of ones (intercept first).
        """
        return np.column_stack((np.ones(self.X.shape[0]), self.X))

    def subset(self, idx: np.ndarray) -> "Dataset":
        """
        Returns the examples selected by 'idx' as a new Dataset.
        """
        y = None if self.y is None else self.y[idx]
        return Dataset(self.X[idx], y, self.features, self.label)

    def summary(self) -> pd.DataFrame:
        """
        Returns a pd.DataFrame containing some descriptive metrics (mean, variance, minimum value
        and maximum value) of each feature.
        """
        return pd.DataFrame({"Mean": self.X.mean(axis=0),
                             "Variance": self.X.var(axis=0),
                             "Min": self.X.min(axis=0),
                             "Max": self.X.max(axis=0)},
                            index=self.features)


class SequenceDataset:

    """
    A set of n equal-length symbol sequences over the alphabet {0, ..., V-1}.
    """

    def __init__(self, sequences: np.ndarray, V: int):
        """
        A set of n equal-length symbol sequences over the alphabet {0, ..., V-1}.

        Parameters
        ----------
        sequences: np.ndarray
            Integer matrix (n, K), one sequence per row (a list of equal-length lists also works)
        V: int
            The alphabet size
        """
        seqs = np.asarray(sequences)
        seqs = seqs if seqs.ndim > 1 else seqs.reshape(1, -1)
        self._check_init(seqs, V)
        self.sequences = seqs.astype(int)
        self.V = int(V)

    @staticmethod
    def _check_init(seqs: np.ndarray, V: int):
        if V < 1:
            raise InvalidArgumentError("The value of 'V' must be a positive integer.")
        if seqs.size == 0:
            raise InvalidArgumentError("A SequenceDataset needs at least one non-empty sequence.")
        if np.any(seqs != np.round(seqs)) or np.any(seqs < 0) or np.any(seqs >= V):
            raise InvalidArgumentError(f"Every symbol must be an integer in [0, {V}).")

    def shape(self) -> Tuple[int, int]:
        """
        Returns (n, K): the number of sequences and their common length.
        """
        return self.sequences.shape

    def __len__(self) -> int:
        return self.sequences.shape[0]

    def __iter__(self):
        return iter(self.sequences)

    def to_lists(self) -> List[List[int]]:
        return self.sequences.tolist()
