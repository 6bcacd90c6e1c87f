from typing import List

import numpy as np

from genlearn.utils.exceptions import DivergenceError, InvalidArgumentError


def flat_grads(grads: List[np.ndarray]) -> np.ndarray:
    """
    Concatenates per-layer gradients in the order used by 'MlpParams.flatten'.
    """
    return np.concatenate([g.ravel() for g in grads])


class MomentumSGD:

    """
    Gradient descent on a flat parameter vector with heavy-ball momentum:
    v <- momentum * v - learning_rate * grad, theta <- theta + v.
    """

    def __init__(self, learning_rate: float, momentum: float = 0.0):
        """
        Gradient descent with heavy-ball momentum.

        Parameters
        ----------
        learning_rate: float
            The step size (zero leaves the parameters unchanged)
        momentum: float (default=0.0)
            The heavy-ball coefficient, in [0, 1)

        Attributes
        ----------
        velocity: np.ndarray
            The running update (None until the first step)
        n_steps: int
            The number of steps taken so far
        """
        if learning_rate < 0:
            raise InvalidArgumentError("The value of 'learning_rate' must be non-negative.")
        if not 0 <= momentum < 1:
            raise InvalidArgumentError("The value of 'momentum' must be in [0,1).")
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.velocity = None
        self.n_steps = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """
        Returns the updated parameters. Raises DivergenceError on a non-finite gradient or update.
        """
        self.n_steps += 1
        if not np.all(np.isfinite(grad)):
            raise DivergenceError(self.n_steps, "The gradient is not finite.")
        if self.velocity is None:
            self.velocity = np.zeros_like(theta)
        self.velocity = self.momentum * self.velocity - self.learning_rate * grad
        new_theta = theta + self.velocity
        if not np.all(np.isfinite(new_theta)):
            raise DivergenceError(self.n_steps, "The parameters are not finite.")
        return new_theta

    def reset(self) -> None:
        """
        Drops the accumulated velocity; the next step starts from rest.
        """
        self.velocity = None

    def retry(self, theta: np.ndarray, grad: np.ndarray, learning_rate: float) -> np.ndarray:
        """
        Replaces the last step, taken from <theta>, by a momentum-free step with a new learning rate
        (used by backtracking). The step count is unchanged.
        """
        if learning_rate < 0:
            raise InvalidArgumentError("The value of 'learning_rate' must be non-negative.")
        self.learning_rate = learning_rate
        self.reset()
        self.n_steps -= 1
        return self.step(theta, grad)
