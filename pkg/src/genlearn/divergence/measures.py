from typing import Tuple

import numpy as np

from genlearn.divergence.f_divergence import f_divergence, renyi_gen
from genlearn.divergence.pmf import Channel, Pmf, check_alphabets
from genlearn.utils.exceptions import InvalidArgumentError


def entropy(p: Pmf) -> float:
    """
    Shannon entropy H(p) = -SUM p log2 p in bits (0 log 0 = 0).
    """
    pp = p.probs[p.probs > 0]
    return float(-np.sum(pp * np.log2(pp)))


def cross_entropy(p: Pmf, q: Pmf) -> float:
    """
    Cross entropy H(p, q) = -SUM p(x) log2 q(x) in bits; +inf when q misses part of the support
    of p.

    Parameters
    ----------
    p: Pmf
        The data pmf
    q: Pmf
        The model pmf
    """
    check_alphabets(p, q)
    support = p.probs > 0
    if np.any(q.probs[support] == 0):
        return np.inf
    return float(-np.sum(p.probs[support] * np.log2(q.probs[support])))


def relative_entropy(p: Pmf, q: Pmf) -> float:
    """
    Relative entropy D(p||q) = SUM p log2(p/q) in bits, by direct summation.
    """
    check_alphabets(p, q)
    support = p.probs > 0
    if np.any(q.probs[support] == 0):
        return np.inf
    ps, qs = p.probs[support], q.probs[support]
    return float(np.sum(ps * np.log2(ps / qs)))


def mixture_midpoint(p: Pmf, q: Pmf) -> Pmf:
    """
    Returns m = (p + q) / 2.
    """
    check_alphabets(p, q)
    return Pmf((p.probs + q.probs) / 2)


def js_divergence(p: Pmf, q: Pmf) -> float:
    """
    Jensen-Shannon divergence D(p||m) + D(q||m) with m = (p+q)/2, in bits and without the 1/2
    prefactor (ranges over [0, 2]).

    Parameters
    ----------
    p: Pmf
        The first pmf
    q: Pmf
        The second pmf
    """
    m = mixture_midpoint(p, q)
    return relative_entropy(p, m) + relative_entropy(q, m)


def total_variation(p: Pmf, q: Pmf) -> float:
    """
    Total variation distance ||p - q||_1 / 2.
    """
    check_alphabets(p, q)
    return float(0.5 * np.sum(np.abs(p.probs - q.probs)))


def hellinger(p: Pmf, q: Pmf) -> float:
    """
    Hellinger distance ||sqrt(p) - sqrt(q)||_2 / sqrt(2).

    Parameters
    ----------
    p: Pmf
        The first pmf
    q: Pmf
        The second pmf
    """
    check_alphabets(p, q)
    return float(np.linalg.norm(np.sqrt(p.probs) - np.sqrt(q.probs)) / np.sqrt(2))


def renyi_divergence(p: Pmf, q: Pmf, alpha: float) -> float:
    """
    Renyi divergence of order alpha in bits, obtained as a monotone transform of the f-divergence
    with generator f_alpha: log2(1 + (alpha - 1) D_f_alpha(p||q)) / (alpha - 1).

    Parameters
    ----------
    p: Pmf
        The first pmf
    q: Pmf
        The second pmf
    alpha: float
        The order (alpha > 0, alpha != 1)
    """
    spec = renyi_gen(alpha)
    d = f_divergence(p, q, spec)
    inner = 1 + (alpha - 1) * d
    # alpha < 1 with disjoint supports drives the inner sum to zero
    if inner <= 0:
        return np.inf
    return float(np.log2(inner) / (alpha - 1))


def data_processed(p: Pmf, q: Pmf, ch: Channel) -> Tuple[Pmf, Pmf]:
    """
    Pushes two input pmfs through the same channel and returns the output marginals
    p(y) = SUM_x p(x) p(y|x) and q(y) = SUM_x q(x) p(y|x).

    Parameters
    ----------
    p: Pmf
        The first input pmf
    q: Pmf
        The second input pmf
    ch: Channel
        The channel p(y|x)
    """
    check_alphabets(p, q)
    if ch.shape[0] != len(p):
        raise InvalidArgumentError(f"The channel has {ch.shape[0]} input rows, expected {len(p)}.")
    return Pmf.normalized(p.probs @ ch.transition), Pmf.normalized(q.probs @ ch.transition)


def joint_with_channel(p: Pmf, ch: Channel) -> Pmf:
    """
    The joint pmf p(x, y) = p(x) p(y|x), flattened in row-major (x, y) order.

    Parameters
    ----------
    p: Pmf
        The input marginal
    ch: Channel
        The channel p(y|x)
    """
    if ch.shape[0] != len(p):
        raise InvalidArgumentError(f"The channel has {ch.shape[0]} input rows, expected {len(p)}.")
    return Pmf.normalized((p.probs[:, None] * ch.transition).ravel())
