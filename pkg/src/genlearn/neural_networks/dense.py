from typing import Tuple

import numpy as np

from genlearn.neural_networks.activation import ACTIVATION
from genlearn.numcore.rng import Rng
from genlearn.utils.exceptions import InvalidArgumentError, InvalidModelError, NonDifferentiableActivationError


class Dense:

    """
    Implements a densely-connected neural network layer z -> f(W [1; z]). The weight matrix W has
    one row per output node and the bias in column 0, so W has shape (output_size, 1 + input_size).
    Layers are immutable: 'forward' and 'backward' keep no state between calls, and the training
    loop builds new layers from updated weights.
    """

    def __init__(self, weights: np.ndarray, activation: str = "identity"):
        """
        Implements a densely-connected neural network layer.

        Parameters
        ----------
        weights: np.ndarray
            The weight matrix (output_size, 1 + input_size), bias column first
        activation: str (default="identity")
            The name of the activation function to be used

        Attributes
        ----------
        activation_function: callable
            The activation function to be used
        activation_derivative: callable
            The derivative of the activation function (None for heaviside)
        """
        weights = np.array(weights, dtype=float)
        # check values of parameters
        self._check_init(weights, activation)
        # parameters
        self.weights = weights
        self.activation = activation
        # attributes
        self.activation_function, self.activation_derivative = ACTIVATION[activation]

    @staticmethod
    def _check_init(weights: np.ndarray, activation: str):
        """
        Checks the shape and entries of the weight matrix and the activation name.

        Parameters
        ----------
        weights: np.ndarray
            The weight matrix
        activation: str
            The name of the activation function to be used
        """
        if weights.ndim != 2 or weights.shape[0] < 1 or weights.shape[1] < 2:
            raise InvalidModelError("The value of 'weights' must be a matrix of shape (out, 1 + in).")
        if not np.all(np.isfinite(weights)):
            raise InvalidModelError("The entries of 'weights' must be finite.")
        if activation not in ACTIVATION:
            raise InvalidArgumentError(f"The value of 'activation' must be in {{{', '.join(ACTIVATION)}}}.")

    @classmethod
    def random(cls, rng: Rng, input_size: int, output_size: int, activation: str = "identity") -> "Dense":
        """
        Returns a layer whose weights (bias included) are drawn from uniform(-s, s) with
        s = 1/sqrt(input_size).

        Parameters
        ----------
        rng: Rng
            The random number generator (its state advances)
        input_size: int
            The number of nodes of the input
        output_size: int
            The number of nodes of the output
        activation: str (default="identity")
            The name of the activation function to be used
        """
        if input_size < 1:
            raise InvalidArgumentError("The value of 'input_size' must be a positive integer.")
        if output_size < 1:
            raise InvalidArgumentError("The value of 'output_size' must be a positive integer.")
        s = 1 / np.sqrt(input_size)
        weights = (2 * rng.uniform((output_size, input_size + 1)) - 1) * s
        return cls(weights, activation)

    @property
    def input_size(self) -> int:
        return self.weights.shape[1] - 1

    @property
    def output_size(self) -> int:
        return self.weights.shape[0]

    @property
    def differentiable(self) -> bool:
        return self.activation_derivative is not None

    def with_weights(self, weights: np.ndarray) -> "Dense":
        """
        Returns a layer with the same activation and new weights.
        """
        return Dense(weights, self.activation)

    def forward(self, input_data: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Computes the pre-activations A = [1, input] @ W^T and the activations f(A) of a batch
        (one example per row). Returns both, since 'backward' needs the pre-activations.

        Parameters
        ----------
        input_data: np.ndarray
            The layer's input data (n, input_size)
        """
        if input_data.shape[1] != self.input_size:
            e_msg = f"Expected an input of width {self.input_size}, got {input_data.shape[1]}."
            raise InvalidArgumentError(e_msg)
        activation_input = input_data @ self.weights[:, 1:].T + self.weights[:, 0]
        return activation_input, self.activation_function(activation_input)

    def backward(self,
                 error: np.ndarray,
                 input_data: np.ndarray,
                 activation_input: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Backpropagates the error (the gradient of the loss with respect to the layer's output)
        through the activation and dense "layers". Returns the gradient with respect to the weight
        matrix and the error to propagate to the previous layer.

        Parameters
        ----------
        error: np.ndarray
            The error propagated to the layer (n, output_size)
        input_data: np.ndarray
            The input seen by 'forward' (n, input_size)
        activation_input: np.ndarray
            The pre-activations computed by 'forward' (n, output_size)
        """
        if not self.differentiable:
            raise NonDifferentiableActivationError(f"Cannot backpropagate through a '{self.activation}' activation.")
        # compute error to propagate to dense
        error_prop_dense = error * self.activation_derivative(activation_input)
        # gradient of the weights (bias column first)
        grad = np.column_stack((error_prop_dense.sum(axis=0), error_prop_dense.T @ input_data))
        # compute and return the error to propagate to the previous layer
        error_prop_next = error_prop_dense @ self.weights[:, 1:]
        return grad, error_prop_next

    def __repr__(self) -> str:
        return f"Dense({self.input_size} -> {self.output_size}, {self.activation})"


if __name__ == "__main__":

    layer = Dense.random(Rng(0), 2, 3, activation="relu")
    pre, out = layer.forward(np.array([[1.0, 3.0], [2.0, 4.0]]))
    print(layer)
    print(out)
