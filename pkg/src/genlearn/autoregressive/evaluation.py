"""
Chain-rule evaluation and sampling shared by every autoregressive model. A model only has to
provide 'conditional_probs(seq)' (row k is p(. | x_1, ..., x_{k-1})) and 'next_probs(prefix)'.
Log-likelihoods are in bits.
"""
from typing import Union

import numpy as np

from genlearn.autoregressive.markov import MarkovModel
from genlearn.autoregressive.neural_ar import NeuralArModel
from genlearn.data.dataset import SequenceDataset
from genlearn.numcore.rng import Rng
from genlearn.utils.exceptions import InvalidArgumentError

ArModel = Union[MarkovModel, NeuralArModel]


def token_log_probs(model: ArModel, seq: np.ndarray) -> np.ndarray:
    """
    Returns log2 p(x_k | x_1, ..., x_{k-1}) for every position k (-inf where the conditional is 0).
    """
    seq = np.asarray(seq, dtype=int)
    if np.any(seq < 0) or np.any(seq >= model.V):
        raise InvalidArgumentError(f"Every symbol must be an integer in [0, {model.V}).")
    probs = model.conditional_probs(seq)[np.arange(len(seq)), seq]
    with np.errstate(divide="ignore"):
        return np.log2(probs)


def sequence_loglik(model: ArModel, seq: np.ndarray) -> float:
    """
    Chain-rule log-likelihood SUM_k log2 p(x_k | x_1, ..., x_{k-1}) of one sequence, in bits.

    Parameters
    ----------
    model: MarkovModel, NeuralArModel
        The autoregressive model
    seq: np.ndarray
        The symbol sequence
    """
    return float(np.sum(token_log_probs(model, seq)))


def dataset_loglik(model: ArModel, ds: SequenceDataset) -> float:
    """
    Log-likelihood of a set of sequences (the sum of the per-sequence values), in bits.
    """
    return float(sum(sequence_loglik(model, seq) for seq in ds))


def perplexity(model: ArModel, ds: SequenceDataset, include_first: bool = False) -> float:
    """
    Perplexity 2^(-mean log2 p(x_k | x_1, ..., x_{k-1})). By default the mean runs over the
    positions k = 2..K of every sequence (n (K-1) tokens); include_first=True also counts x_1.

    Parameters
    ----------
    model: MarkovModel, NeuralArModel
        The autoregressive model
    ds: SequenceDataset
        The evaluation sequences
    include_first: bool (default=False)
        Whether the first symbol of every sequence is counted
    """
    n, K = ds.shape()
    start = 0 if include_first else 1
    if K - start < 1:
        raise InvalidArgumentError("Perplexity over positions 2..K needs sequences of length K >= 2.")
    logs = np.concatenate([token_log_probs(model, seq)[start:] for seq in ds])
    if np.any(np.isneginf(logs)):
        return np.inf
    return float(2.0 ** (-np.mean(logs)))


def sample_ancestral(model: ArModel, rng: Rng, length: int) -> np.ndarray:
    """
    Draws x_1 ~ p(x_1), then x_k ~ p(x_k | x_1, ..., x_{k-1}) one symbol at a time.

    Parameters
    ----------
    model: MarkovModel, NeuralArModel
        The autoregressive model
    rng: Rng
        The random number generator (its state advances)
    length: int
        The length of the sequence
    """
    if length < 1:
        raise InvalidArgumentError("The value of 'length' must be a positive integer.")
    seq = []
    for _ in range(length):
        seq.append(rng.categorical(model.next_probs(seq)))
    return np.array(seq, dtype=int)


def stationary_distribution(transition: np.ndarray) -> np.ndarray:
    """
    Stationary pmf pi = pi P of an irreducible order-1 chain (solved as a linear system).
    """
    P = np.asarray(transition, dtype=float)
    V = P.shape[0]
    A = np.vstack((P.T - np.eye(V), np.ones(V)))
    b = np.concatenate((np.zeros(V), [1.0]))
    pi = np.linalg.lstsq(A, b, rcond=None)[0]
    return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()


def entropy_rate(transition: np.ndarray) -> float:
    """
    Entropy rate -SUM_i pi_i SUM_j P_ij log2 P_ij (bits per symbol) of a stationary order-1 chain.

    Parameters
    ----------
    transition: np.ndarray
        Row-stochastic transition matrix (V, V)
    """
    P = np.asarray(transition, dtype=float)
    pi = stationary_distribution(P)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log2(P), 0.0)
    return float(-pi @ terms.sum(axis=1))


def markov_chain_sequences(rng: Rng,
                           transition: np.ndarray,
                           n: int,
                           K: int,
                           initial: np.ndarray = None) -> SequenceDataset:
    """
    Draws n sequences of length K from an order-1 chain.

    Parameters
    ----------
    rng: Rng
        The random number generator (its state advances)
    transition: np.ndarray
        Row-stochastic transition matrix (V, V)
    n: int
        The number of sequences
    K: int
        The length of each sequence
    initial: np.ndarray (default=None)
        The pmf of x_1 (None -> the stationary distribution)
    """
    P = np.asarray(transition, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or not np.allclose(P.sum(axis=1), 1.0):
        raise InvalidArgumentError("The value of 'transition' must be a square row-stochastic matrix.")
    initial = stationary_distribution(P) if initial is None else np.asarray(initial, dtype=float)
    seqs = np.zeros((n, K), dtype=int)
    for i in range(n):
        seqs[i, 0] = rng.categorical(initial)
        for k in range(1, K):
            seqs[i, k] = rng.categorical(P[seqs[i, k - 1]])
    return SequenceDataset(seqs, P.shape[0])
