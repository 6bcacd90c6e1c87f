from typing import Sequence, Tuple

import numpy as np

from genlearn.autoregressive.markov import padded_contexts
from genlearn.data.dataset import Dataset, SequenceDataset
from genlearn.neural_networks.dense import Dense
from genlearn.neural_networks.nn import MlpParams, forward, train
from genlearn.numcore.rng import Rng
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import InvalidArgumentError, InvalidModelError


class NeuralArModel:

    """
    Autoregressive model whose conditionals p(x_k | x_{k-c}, ..., x_{k-1}) all come from one
    network: the c preceding symbols (pad symbol V before the start) are one-hot encoded over V+1
    values and mapped to next-symbol logits by a categorical-head MLP.
    """

    def __init__(self, net: MlpParams, V: int, c: int):
        """
        Autoregressive model with one network shared by every position.

        Parameters
        ----------
        net: MlpParams
            Categorical-head network with input width max(1, c (V+1)) and output width V
        V: int
            The alphabet size
        c: int
            The context width (0 -> the network only sees a constant input)
        """
        self._check_init(net, V, c)
        self.net = net
        self.V = int(V)
        self.c = int(c)

    @staticmethod
    def _check_init(net: MlpParams, V: int, c: int):
        if V < 2:
            raise InvalidArgumentError("The value of 'V' must be at least 2.")
        if c < 0:
            raise InvalidArgumentError("The value of 'c' must be a non-negative integer.")
        if net.head != "categorical" or net.output_size != V:
            raise InvalidModelError(f"The network must have a categorical head with {V} outputs.")
        if net.input_size != max(1, c * (V + 1)):
            raise InvalidModelError(f"The network must take {max(1, c * (V + 1))} input(s).")

    @classmethod
    def init(cls,
             rng: Rng,
             V: int,
             c: int,
             hidden: Sequence[int] = (),
             activation: str = "logistic") -> "NeuralArModel":
        """
        Returns an untrained model. The output layer starts at zero, so every conditional is
        uniform until training moves it.

        Parameters
        ----------
        rng: Rng
            The random number generator used for the hidden layers
        V: int
            The alphabet size
        c: int
            The context width
        hidden: tuple (default=())
            The widths of the hidden layers
        activation: str (default="logistic")
            The hidden activation
        """
        sizes = [max(1, c * (V + 1)), *hidden, V]
        net = MlpParams.random(rng, sizes, activation=activation, head="categorical")
        last = net.layers[-1]
        net = MlpParams(net.layers[:-1] + [Dense(np.zeros_like(last.weights))], head="categorical")
        return cls(net, V, c)

    def encode_contexts(self, contexts: np.ndarray) -> np.ndarray:
        """
        One-hot encodes a (n, c) matrix of contexts (pad symbol V allowed) into network inputs.
        """
        contexts = np.asarray(contexts, dtype=int)
        if self.c == 0:
            return np.zeros((contexts.shape[0], 1))
        contexts = contexts.reshape(-1, self.c)
        onehot = np.zeros((contexts.shape[0], self.c, self.V + 1))
        rows, cols = np.indices(contexts.shape)
        onehot[rows, cols, contexts] = 1.0
        return onehot.reshape(contexts.shape[0], -1)

    def encode(self, seq: np.ndarray) -> np.ndarray:
        """
        Returns the network inputs (K, width) for every position of a sequence.
        """
        seq = np.asarray(seq, dtype=int)
        return self.encode_contexts(padded_contexts(seq, self.V, self.c))

    def conditional_probs(self, seq: np.ndarray) -> np.ndarray:
        """
        Returns the (K, V) matrix whose row k is p(. | x_1, ..., x_{k-1}).
        """
        return forward(self.net, self.encode(seq))[0]

    def next_probs(self, prefix: Sequence[int]) -> np.ndarray:
        """
        Returns p(. | prefix): the conditional pmf of the symbol that follows 'prefix'.
        """
        tail = list(prefix[max(0, len(prefix) - self.c):]) if self.c else []
        context = [self.V] * (self.c - len(tail)) + tail
        return forward(self.net, self.encode_contexts(np.array([context])))[0][0]

    def to_dict(self) -> dict:
        return {"V": self.V, "c": self.c, "net": self.net.to_dict()}

    @classmethod
    def from_dict(cls, record: dict) -> "NeuralArModel":
        return cls(MlpParams.from_dict(record["net"]), record["V"], record["c"])


def next_token_dataset(model: NeuralArModel, ds: SequenceDataset) -> Dataset:
    """
    Stacks every (encoded context, next symbol) pair of a sequence dataset.
    """
    X = np.concatenate([model.encode(seq) for seq in ds])
    y = np.concatenate([seq for seq in ds])
    return Dataset(X, y)


def fit_neural_ar(ds: SequenceDataset,
                  c: int,
                  cfg: ExperimentConfig,
                  hidden: Sequence[int] = (),
                  activation: str = "logistic") -> Tuple[NeuralArModel, np.ndarray]:
    """
    Trains a shared-parameter autoregressive model by SGD on the next-symbol categorical loss
    over all (context, next) pairs. Returns the model and the training perplexity trace
    (exp of the mean per-token loss, every token counted), before training and after each epoch.

    Parameters
    ----------
    ds: SequenceDataset
        The training sequences
    c: int
        The context width
    cfg: ExperimentConfig
        Seed, learning rate, momentum, epochs and batch size
    hidden: tuple (default=())
        The widths of the hidden layers
    activation: str (default="logistic")
        The hidden activation
    """
    model = NeuralArModel.init(Rng(cfg.seed, "neural_ar/init"), ds.V, c, hidden, activation)
    pairs = next_token_dataset(model, ds)
    cfg = cfg.replace(batch_size=min(cfg.batch_size, pairs.shape()[0]))
    net, trace = train(model.net, pairs, cfg)
    return NeuralArModel(net, ds.V, c), np.exp(trace)
