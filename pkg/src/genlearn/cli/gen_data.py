"""
Synthetic datasets for the command line: a 2-D Gaussian mixture, a noisy line, sequences from a
random order-1 Markov chain and labelled, well separated Gaussian clusters.
"""
from typing import Dict, List, Union

import numpy as np

from genlearn.autoregressive.evaluation import markov_chain_sequences
from genlearn.data.dataset import Dataset, SequenceDataset
from genlearn.divergence.pmf import Channel
from genlearn.mixture.gmm import GmmParams, gmm_sample
from genlearn.numcore.rng import Rng
from genlearn.utils.exceptions import InvalidArgumentError

# default parameters of every kind
KINDS = {"mixture2d": {"components": 2, "separation": 4.0, "variance": 0.25},
         "line": {"slope": 3.0, "intercept": 2.0, "noise": 0.5, "xmin": -2.0, "xmax": 2.0},
         "markov_chain": {"V": 3, "K": 20},
         "separated_gaussians": {"separation": 10.0, "sigma": 1.0, "dim": 1}}


def parse_params(items: List[str]) -> Dict[str, float]:
    """
    Parses 'key=value' strings into a dict of floats.
    """
    params = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidArgumentError(f"Expected 'key=value', got {item!r}.")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise InvalidArgumentError(f"The value of '{key.strip()}' must be a number.") from None
    return params


def _resolve(kind: str, params: Dict[str, float]) -> Dict[str, float]:
    if kind not in KINDS:
        raise InvalidArgumentError(f"The value of 'kind' must be in {{{', '.join(KINDS)}}}.")
    unknown = set(params) - set(KINDS[kind])
    if unknown:
        raise InvalidArgumentError(f"Unknown parameter(s) for '{kind}': {', '.join(sorted(unknown))}.")
    return {**KINDS[kind], **params}


def _count(params: Dict[str, float], key: str, minimum: int = 1) -> int:
    value = params[key]
    if value != int(value) or value < minimum:
        raise InvalidArgumentError(f"The value of '{key}' must be an integer >= {minimum}.")
    return int(value)


def gen_data(kind: str, params: Dict[str, float], seed: int, n: int) -> Union[Dataset, SequenceDataset]:
    """
    Generates n rows (or n sequences) of a synthetic dataset, deterministically per seed.

    Parameters
    ----------
    kind: str
        'mixture2d', 'line', 'markov_chain' or 'separated_gaussians'
    params: dict
        Overrides of the kind's default parameters
    seed: int
        The seed
    n: int
        The number of rows or sequences
    """
    params = _resolve(kind, params)
    if n < 1:
        raise InvalidArgumentError("The value of 'n' must be a positive integer.")
    rng = Rng(seed, f"gen_data/{kind}")
    if kind == "mixture2d":
        d = _count(params, "components")
        angles = 2 * np.pi * np.arange(d) / d
        means = 0.5 * params["separation"] * np.column_stack((np.cos(angles), np.sin(angles)))
        X, _ = gmm_sample(GmmParams(np.full(d, 1.0 / d), means, [params["variance"] * np.eye(2)] * d), rng, n)
        return Dataset(X)
    if kind == "line":
        x = params["xmin"] + (params["xmax"] - params["xmin"]) * rng.uniform(n)
        y = params["intercept"] + params["slope"] * x + params["noise"] * rng.normal(n)
        return Dataset(x, y, ["x1"], "y")
    if kind == "markov_chain":
        V = _count(params, "V", minimum=2)
        transition = Channel.random(rng.substream("transition"), V, V).transition
        return markov_chain_sequences(rng, transition, n, _count(params, "K"))
    dim = _count(params, "dim")
    half = 0.5 * params["separation"]
    truth = GmmParams([0.5, 0.5], [[-half] * dim, [half] * dim], [params["sigma"] ** 2 * np.eye(dim)] * 2)
    X, labels = gmm_sample(truth, rng, n)
    return Dataset(X, labels)
