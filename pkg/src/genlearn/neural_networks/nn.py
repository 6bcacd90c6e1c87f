import warnings
from typing import List, Sequence, Tuple, Union

import numpy as np

from genlearn.data.dataset import Dataset
from genlearn.metrics.cross_entropy import binary_nll, categorical_nll
from genlearn.neural_networks.activation import HEAD_LINK
from genlearn.neural_networks.dense import Dense
from genlearn.neural_networks.optimizer import MomentumSGD, flat_grads
from genlearn.numcore.rng import Rng
from genlearn.statistics.gaussian import LOG_2PI
from genlearn.statistics.sigmoid_function import sigmoid_function, softmax
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import (DivergenceError, InvalidArgumentError, InvalidModelError,
                                       NonDifferentiableActivationError)

MAX_HALVINGS = 40


class MlpParams:

    """
    Parameters of a multi-layered perceptron: a chain of dense layers whose last layer outputs the
    logits, and an output head that turns the logits into the parameters of p(y|x) (the mean of a
    Gaussian with fixed variance sigma2, the probability of a Bernoulli, or the probabilities of a
    categorical distribution).
    """

    def __init__(self, layers: Sequence[Dense], head: str = "gaussian_regression", sigma2: float = 1.0):
        """
        Parameters of a multi-layered perceptron.

        Parameters
        ----------
        layers: list
            The dense layers, input first; the last one must use the identity activation
        head: str (default="gaussian_regression")
            The output head ('gaussian_regression', 'bernoulli' or 'categorical')
        sigma2: float (default=1.0)
            The fixed noise variance of the Gaussian head
        """
        layers = list(layers)
        # check values of parameters
        self._check_init(layers, head, sigma2)
        # parameters
        self.layers = layers
        self.head = head
        self.sigma2 = float(sigma2)

    @staticmethod
    def _check_init(layers: List[Dense], head: str, sigma2: float):
        """
        Checks that the layers chain, that the last layer outputs logits and that the head matches
        its width.
        """
        if not layers:
            raise InvalidModelError("An MLP needs at least one layer.")
        if head not in HEAD_LINK:
            raise InvalidArgumentError(f"The value of 'head' must be in {{{', '.join(HEAD_LINK)}}}.")
        if sigma2 <= 0:
            raise InvalidArgumentError("The value of 'sigma2' must be positive.")
        for l, (prev, nxt) in enumerate(zip(layers[:-1], layers[1:]), start=1):
            if nxt.input_size != prev.output_size:
                e_msg = f"Layer {l + 1} expects {nxt.input_size} input(s) but layer {l} outputs {prev.output_size}."
                raise InvalidModelError(e_msg)
        if layers[-1].activation != "identity":
            raise InvalidModelError("The last layer must output logits (identity activation).")
        if head == "bernoulli" and layers[-1].output_size != 1:
            raise InvalidModelError("The 'bernoulli' head needs a single output.")
        if head == "categorical" and layers[-1].output_size < 2:
            raise InvalidModelError("The 'categorical' head needs at least two outputs.")

    @classmethod
    def random(cls,
               rng: Rng,
               sizes: Sequence[int],
               activation: Union[str, Sequence[str]] = "logistic",
               head: str = "gaussian_regression",
               sigma2: float = 1.0) -> "MlpParams":
        """
        Returns an MLP with weights drawn from uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).

        Parameters
        ----------
        rng: Rng
            The random number generator (its state advances)
        sizes: list
            The layer widths [input, hidden_1, ..., hidden_L, output]
        activation: str, list (default="logistic")
            The hidden activation(s), one name for all hidden layers or one per hidden layer
        head: str (default="gaussian_regression")
            The output head
        sigma2: float (default=1.0)
            The fixed noise variance of the Gaussian head
        """
        if len(sizes) < 2:
            raise InvalidArgumentError("The value of 'sizes' must list at least the input and output widths.")
        n_hidden = len(sizes) - 2
        activations = [activation] * n_hidden if isinstance(activation, str) else list(activation)
        if len(activations) != n_hidden:
            raise InvalidArgumentError(f"Expected {n_hidden} hidden activation(s), got {len(activations)}.")
        layers = [Dense.random(rng, i, o, a) for i, o, a in zip(sizes[:-1], sizes[1:], activations + ["identity"])]
        return cls(layers, head, sigma2)

    @property
    def input_size(self) -> int:
        return self.layers[0].input_size

    @property
    def output_size(self) -> int:
        return self.layers[-1].output_size

    @property
    def weights(self) -> List[np.ndarray]:
        return [layer.weights for layer in self.layers]

    @property
    def differentiable(self) -> bool:
        return all(layer.differentiable for layer in self.layers)

    def with_weights(self, weights: Sequence[np.ndarray]) -> "MlpParams":
        """
        Returns an MLP with the same architecture and new weight matrices.
        """
        if len(weights) != len(self.layers):
            raise InvalidArgumentError(f"Expected {len(self.layers)} weight matrices, got {len(weights)}.")
        layers = []
        for layer, w in zip(self.layers, weights):
            if np.shape(w) != layer.weights.shape:
                raise InvalidArgumentError(f"Expected weights of shape {layer.weights.shape}, got {np.shape(w)}.")
            layers.append(layer.with_weights(w))
        return MlpParams(layers, self.head, self.sigma2)

    def flatten(self) -> np.ndarray:
        """
        Returns every weight in one vector (layer by layer, row-major).
        """
        return np.concatenate([w.ravel() for w in self.weights])

    def with_flat(self, theta: np.ndarray) -> "MlpParams":
        """
        Inverse of 'flatten': returns an MLP with the same architecture and the weights in 'theta'.
        """
        theta = np.asarray(theta, dtype=float)
        if theta.size != self.flatten().size:
            raise InvalidArgumentError(f"Expected {self.flatten().size} weights, got {theta.size}.")
        weights, start = [], 0
        for w in self.weights:
            weights.append(theta[start:start + w.size].reshape(w.shape))
            start += w.size
        return self.with_weights(weights)

    def to_dict(self) -> dict:
        return {"layers": [{"weights": layer.weights.tolist(), "activation": layer.activation} for layer in self.layers],
                "head": self.head,
                "sigma2": self.sigma2}

    @classmethod
    def from_dict(cls, record: dict) -> "MlpParams":
        layers = [Dense(np.array(layer["weights"]), layer["activation"]) for layer in record["layers"]]
        return cls(layers, record["head"], record.get("sigma2", 1.0))

    def __repr__(self) -> str:
        widths = [self.input_size] + [layer.output_size for layer in self.layers]
        return f"MlpParams({' -> '.join(map(str, widths))}, head={self.head})"


class ForwardCache:

    """
    What a forward pass leaves behind for backpropagation: the input and the pre-activations of
    every layer, and the logits of the last one.
    """

    def __init__(self, inputs: List[np.ndarray], activation_inputs: List[np.ndarray]):
        self.inputs = inputs
        self.activation_inputs = activation_inputs

    @property
    def logits(self) -> np.ndarray:
        return self.activation_inputs[-1]


def forward(net: MlpParams, x: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    """
    Propagates an input (a vector, or a batch with one example per row) through the network and
    returns the head's output (Gaussian mean, Bernoulli probability or class probabilities) with
    the cache needed by 'backprop'.

    Parameters
    ----------
    net: MlpParams
        The network
    x: np.ndarray
        An input vector (K,) or a batch (n, K)
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    z = np.atleast_2d(x)
    if z.shape[1] != net.input_size:
        raise InvalidArgumentError(f"Expected an input of width {net.input_size}, got {z.shape[1]}.")
    inputs, activation_inputs = [], []
    # forward -> the output of one layer is the input of its successor
    for layer in net.layers:
        inputs.append(z)
        a, z = layer.forward(z)
        activation_inputs.append(a)
    cache = ForwardCache(inputs, activation_inputs)
    output = HEAD_LINK[net.head](cache.logits)
    return (output[0] if single else output), cache


def predict(net: MlpParams, X: np.ndarray) -> np.ndarray:
    """
    Returns the head's output for every row of X (without the cache).
    """
    return forward(net, X)[0]


def head_targets(net: MlpParams, y: np.ndarray) -> np.ndarray:
    """
    Checks that the targets match the head and returns them in the layout the loss expects:
    a real matrix (n, out) for the Gaussian head, a binary column (n, 1) for the Bernoulli head
    and a vector of class indices for the categorical head.

    Parameters
    ----------
    net: MlpParams
        The network
    y: np.ndarray
        The targets
    """
    if y is None:
        raise InvalidArgumentError(f"The '{net.head}' head needs targets.")
    y = np.asarray(y)
    if net.head == "gaussian_regression":
        y = y.astype(float).reshape(len(y), -1)
        if y.shape[1] != net.output_size:
            raise InvalidArgumentError(f"Expected {net.output_size} target(s) per example, got {y.shape[1]}.")
        return y
    if net.head == "bernoulli":
        if y.ndim != 1 or not np.all((y == 0) | (y == 1)):
            raise InvalidArgumentError("The 'bernoulli' head needs a vector of binary targets.")
        return y.astype(float).reshape(-1, 1)
    if y.ndim != 1 or np.any(y != np.round(y)) or np.any(y < 0) or np.any(y >= net.output_size):
        raise InvalidArgumentError(f"The 'categorical' head needs class indices in [0, {net.output_size}).")
    return y.astype(int)


def _head_loss(net: MlpParams, logits: np.ndarray, y: np.ndarray) -> float:
    """
    Negative log-likelihood (nats) of prepared targets given the logits.
    """
    if net.head == "gaussian_regression":
        r = y - logits
        return float(0.5 * np.sum(r ** 2) / net.sigma2 + 0.5 * r.size * (LOG_2PI + np.log(net.sigma2)))
    if net.head == "bernoulli":
        return binary_nll(y, logits)
    return categorical_nll(y, logits)


def d_logits(net: MlpParams, logits: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Gradient of the negative log-likelihood with respect to the logits of the last layer:
    (r - y) / sigma2 for the Gaussian head, sigma(a) - y for the Bernoulli head and
    softmax(a) - onehot(y) for the categorical head.

    Parameters
    ----------
    net: MlpParams
        The network
    logits: np.ndarray
        The logits (n, out)
    y: np.ndarray
        Targets prepared by 'head_targets'
    """
    if net.head == "gaussian_regression":
        return (logits - y) / net.sigma2
    if net.head == "bernoulli":
        return sigmoid_function(logits) - y
    return softmax(logits) - np.eye(net.output_size)[y]


def loss(net: MlpParams, batch: Dataset) -> float:
    """
    Negative conditional log-likelihood of a labelled batch in nats: squared error / (2 sigma2)
    plus the Gaussian normaliser, the binary cross-entropy, or the categorical cross-entropy.

    Parameters
    ----------
    net: MlpParams
        The network
    batch: Dataset
        Inputs and targets matching the head
    """
    y = head_targets(net, batch.y)
    _, cache = forward(net, batch.X)
    return _head_loss(net, cache.logits, y)


def backprop(net: MlpParams, cache: ForwardCache, d_logits: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Applies the chain rule backwards through the layers. Returns the gradient with respect to every
    weight matrix and the gradient with respect to the network input.

    Parameters
    ----------
    net: MlpParams
        The network
    cache: ForwardCache
        The cache of the forward pass
    d_logits: np.ndarray
        Gradient of the objective with respect to the logits (n, out)
    """
    if not net.differentiable:
        raise NonDifferentiableActivationError("Backpropagation through a heaviside activation is not defined.")
    error = np.atleast_2d(d_logits)
    grads = [None] * len(net.layers)
    for l in reversed(range(len(net.layers))):
        grads[l], error = net.layers[l].backward(error, cache.inputs[l], cache.activation_inputs[l])
    return grads, error


def backward(net: MlpParams, batch: Dataset) -> MlpParams:
    """
    Exact gradient of 'loss' with respect to every weight, returned as a record with the same
    architecture as the network.

    Parameters
    ----------
    net: MlpParams
        The network (no heaviside activations)
    batch: Dataset
        Inputs and targets matching the head
    """
    if not net.differentiable:
        raise NonDifferentiableActivationError("Backpropagation through a heaviside activation is not defined.")
    y = head_targets(net, batch.y)
    _, cache = forward(net, batch.X)
    grads, _ = backprop(net, cache, d_logits(net, cache.logits, y))
    return net.with_weights(grads)


def train(net: MlpParams, ds: Dataset, cfg: ExperimentConfig) -> Tuple[MlpParams, np.ndarray]:
    """
    Trains the network by stochastic gradient descent on the mean loss of shuffled minibatches,
    with optional heavy-ball momentum. When one batch holds the whole dataset and cfg.backtracking
    is set, a step that raises the loss is retried with the learning rate halved. Returns the
    trained network and the trace of the mean per-example loss (before training, then after every
    epoch).

    Parameters
    ----------
    net: MlpParams
        The initial network
    ds: Dataset
        Inputs and targets matching the head
    cfg: ExperimentConfig
        Seed, learning rate, momentum, epochs and batch size
    """
    n = ds.shape()[0]
    if cfg.batch_size > n:
        raise InvalidArgumentError(f"The value of 'batch_size' ({cfg.batch_size}) cannot exceed the {n} examples.")
    if not net.differentiable:
        raise NonDifferentiableActivationError("Backpropagation through a heaviside activation is not defined.")
    X, y = ds.X, head_targets(net, ds.y)
    rng = Rng(cfg.seed, "mlp/shuffle")
    full_batch = cfg.batch_size == n

    def mean_loss_and_grad(theta, idx):
        model = net.with_flat(theta)
        _, cache = forward(model, X[idx])
        value = _head_loss(model, cache.logits, y[idx])
        grads, _ = backprop(model, cache, d_logits(model, cache.logits, y[idx]))
        return value / len(idx), flat_grads(grads) / len(idx)

    def mean_loss(theta):
        _, cache = forward(net.with_flat(theta), X)
        return _head_loss(net, cache.logits, y) / n

    theta = net.flatten()
    optimizer = MomentumSGD(cfg.learning_rate, cfg.momentum)
    trace = [mean_loss(theta)]
    step = 0
    stalled = False
    for epoch in range(1, cfg.epochs + 1):
        # a full batch is summed in its natural order so its loss matches the trace exactly
        order = np.arange(n) if full_batch else rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            step += 1
            value, grad = mean_loss_and_grad(theta, order[start:start + cfg.batch_size])
            if not np.isfinite(value):
                raise DivergenceError(step, "The training loss is not finite.")
            candidate = optimizer.step(theta, grad)
            if full_batch and cfg.backtracking:
                new_value, halvings = mean_loss(candidate), 0
                while not new_value <= value and halvings < MAX_HALVINGS:
                    halvings += 1
                    candidate = optimizer.retry(theta, grad, optimizer.learning_rate / 2)
                    new_value = mean_loss(candidate)
                if not new_value <= value:
                    warnings.warn(f"Backtracking exhausted at step {step}; stopping.", Warning)
                    stalled = True
                    break
            theta = candidate
        epoch_loss = mean_loss(theta)
        if not np.isfinite(epoch_loss):
            raise DivergenceError(step, "The training loss is not finite.")
        trace.append(epoch_loss)
        if cfg.verbose:
            print(f"Epoch {epoch}/{cfg.epochs} -- mean_loss = {epoch_loss:.4f}")
        if stalled:
            break
    return net.with_flat(theta), np.array(trace)


if __name__ == "__main__":

    # XNOR with two logistic hidden units
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    ds = Dataset(X, np.array([1, 0, 0, 1]))
    net = MlpParams.random(Rng(0), [2, 4, 1], activation="logistic", head="bernoulli")
    cfg = ExperimentConfig(seed=0, learning_rate=1.0, epochs=2000, batch_size=4)
    trained, trace = train(net, ds, cfg)
    print(trace[-1])
    print(predict(trained, X).ravel())
