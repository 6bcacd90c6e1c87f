"""
Denoising score matching: a network s(y) learns the score of the noisy density of
Y = X + N(0, sigma2 I) by regressing the noise direction (x - y) / sigma2.
"""
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from genlearn.data.dataset import Dataset
from genlearn.neural_networks.dense import Dense
from genlearn.neural_networks.nn import MlpParams, backprop, forward
from genlearn.neural_networks.optimizer import MomentumSGD, flat_grads
from genlearn.numcore.rng import Rng
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import DivergenceError, InvalidArgumentError, InvalidModelError

EVAL_ROWS = 512
EVAL_POINTS = 20


class ScoreModel:

    """
    A score network y (K,) -> s(y) (K,) tied to the noise level it was trained for.
    """

    def __init__(self, net: MlpParams, sigma2: float):
        """
        A score network tied to a noise level.

        Parameters
        ----------
        net: MlpParams
            Network with the identity ('gaussian_regression') head and equal input and output widths
        sigma2: float
            The noise variance
        """
        self._check_init(net, sigma2)
        self.net = net
        self.sigma2 = float(sigma2)

    @staticmethod
    def _check_init(net: MlpParams, sigma2: float):
        if net.head != "gaussian_regression":
            raise InvalidModelError("A score network needs the identity ('gaussian_regression') head.")
        if net.input_size != net.output_size:
            raise InvalidModelError("A score network must have equal input and output widths.")
        if not sigma2 > 0:
            raise InvalidArgumentError("The value of 'sigma2' must be positive.")

    @classmethod
    def random(cls, rng: Rng, dim: int, sigma2: float, hidden: Sequence[int] = (32,),
               activation: str = "tanh") -> "ScoreModel":
        return cls(MlpParams.random(rng, [dim, *hidden, dim], activation=activation), sigma2)

    @classmethod
    def linear(cls, A, b, sigma2: float) -> "ScoreModel":
        """
        The affine score s(y) = A y + b.
        """
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        return cls(MlpParams([Dense(np.column_stack((b, A)))]), sigma2)

    @property
    def dim(self) -> int:
        return self.net.input_size

    def with_net(self, net: MlpParams) -> "ScoreModel":
        return ScoreModel(net, self.sigma2)

    def __call__(self, Y: np.ndarray) -> np.ndarray:
        return forward(self.net, np.atleast_2d(np.asarray(Y, dtype=float)).reshape(-1, self.dim))[0]

    def to_dict(self) -> dict:
        return {"net": self.net.to_dict(), "sigma2": self.sigma2}

    @classmethod
    def from_dict(cls, record: dict) -> "ScoreModel":
        return cls(MlpParams.from_dict(record["net"]), record["sigma2"])

    def __repr__(self) -> str:
        return f"ScoreModel(dim={self.dim}, sigma2={self.sigma2:g})"


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X.X if isinstance(X, Dataset) else X, dtype=float)
    return X.reshape(-1, 1) if X.ndim == 1 else X


def dsm_objective(s: Union[ScoreModel, Callable[[np.ndarray], np.ndarray]], X: np.ndarray, rng: Rng,
                  sigma2: Optional[float] = None) -> float:
    """
    Monte-Carlo estimate of 1/2 E ||(x - y) / sigma2 - s(y)||^2 with y = x + sqrt(sigma2) eps, one
    noise draw per row of X.

    Parameters
    ----------
    s: ScoreModel, callable
        The score model, or any function mapping a batch (n, K) to scores (n, K)
    X: np.ndarray
        The clean data (n, K)
    rng: Rng
        Source of the noise (its state advances)
    sigma2: float (default=None)
        The noise variance (the model's own when None)
    """
    if sigma2 is None:
        if not isinstance(s, ScoreModel):
            raise InvalidArgumentError("A callable score needs an explicit 'sigma2'.")
        sigma2 = s.sigma2
    if not sigma2 > 0:
        raise InvalidArgumentError("The value of 'sigma2' must be positive.")
    X = _as_matrix(X)
    eps = rng.normal(X.shape)
    Y = X + np.sqrt(sigma2) * eps
    target = (X - Y) / sigma2
    pred = np.asarray(s(Y), dtype=float).reshape(X.shape)
    return float(0.5 * np.mean(np.sum((target - pred) ** 2, axis=1)))


def dsm_loss_and_grad(model: ScoreModel, X: np.ndarray, eps: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Objective on given standard-normal noise eps (n, K) and its gradient with respect to the flat
    weights.
    """
    Y = X + np.sqrt(model.sigma2) * eps
    target = -eps / np.sqrt(model.sigma2)
    pred, cache = forward(model.net, Y)
    r = pred - target
    grads, _ = backprop(model.net, cache, r / X.shape[0])
    return float(0.5 * np.mean(np.sum(r ** 2, axis=1))), flat_grads(grads)


def fit_linear_score(X: np.ndarray, sigma2: float, rng: Optional[Rng] = None,
                     n_noise: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """
    Minimiser (A, b) of the denoising objective over affine scores s(y) = A y + b. Without an rng
    the noise is integrated out exactly, which gives A = -(C + sigma2 I)^-1 with C the empirical
    covariance and b = -A xbar. With an rng the objective is sampled (n_noise draws per row) and
    solved by least squares.

    Parameters
    ----------
    X: np.ndarray
        The clean data (n, K)
    sigma2: float
        The noise variance
    rng: Rng (default=None)
        Source of the noise for the sampled version
    n_noise: int (default=1)
        Noise draws per row in the sampled version
    """
    if not sigma2 > 0:
        raise InvalidArgumentError("The value of 'sigma2' must be positive.")
    X = _as_matrix(X)
    n, K = X.shape
    if rng is None:
        mean = X.mean(axis=0)
        C = (X - mean).T @ (X - mean) / n
        A = -np.linalg.inv(C + sigma2 * np.eye(K))
        return A, -A @ mean
    if n_noise < 1:
        raise InvalidArgumentError("The value of 'n_noise' must be a positive integer.")
    Xr = np.repeat(X, n_noise, axis=0)
    eps = rng.normal(Xr.shape)
    Y = Xr + np.sqrt(sigma2) * eps
    design = np.column_stack((np.ones(len(Y)), Y))
    coef, *_ = np.linalg.lstsq(design, -eps / np.sqrt(sigma2), rcond=None)
    return coef[1:].T, coef[0]


def dsm_eval(model: ScoreModel, X: np.ndarray, seed: int) -> float:
    """
    Objective on the first rows of X with noise frozen by 'seed'.
    """
    return dsm_objective(model, _as_matrix(X)[:EVAL_ROWS], Rng(seed, "score/eval"))


def dsm_train(ds,
              sigma2: float,
              cfg: ExperimentConfig,
              hidden: Sequence[int] = (32,),
              activation: str = "tanh") -> Tuple[ScoreModel, pd.DataFrame]:
    """
    Trains a score network by minibatch SGD on the denoising objective. Returns the model and a
    trace with columns 'step', 'loss' (minibatch) and 'eval_loss' (frozen noise, filled at regular
    intervals).

    Parameters
    ----------
    ds: Dataset, np.ndarray
        The clean data (n, K)
    sigma2: float
        The noise variance
    cfg: ExperimentConfig
        Seed, learning rate, momentum, max_steps and batch size
    hidden: tuple (default=(32,))
        Hidden widths (empty for an affine score)
    activation: str (default="tanh")
        Hidden activation
    """
    X = _as_matrix(ds)
    n, K = X.shape
    if n < 1:
        raise InvalidArgumentError("The data must hold at least one point.")
    model = ScoreModel.random(Rng(cfg.seed, "score/init"), K, sigma2, hidden, activation)
    batches = Rng(cfg.seed, "score/batch")
    noise = Rng(cfg.seed, "score/noise")
    optimizer = MomentumSGD(cfg.learning_rate, cfg.momentum)
    batch_size = min(cfg.batch_size, n)
    eval_every = max(1, cfg.max_steps // EVAL_POINTS)
    theta = model.net.flatten()
    rows = [{"step": 0, "loss": np.nan, "eval_loss": dsm_eval(model, X, cfg.seed)}]
    for step in range(1, cfg.max_steps + 1):
        x = X[batches.integers(n, size=batch_size)]
        loss, grad = dsm_loss_and_grad(model, x, noise.normal(x.shape))
        if not np.isfinite(loss):
            raise DivergenceError(step, "The denoising score matching loss is not finite.")
        theta = optimizer.step(theta, grad)
        model = model.with_net(model.net.with_flat(theta))
        row = {"step": step, "loss": loss, "eval_loss": np.nan}
        if step % eval_every == 0 or step == cfg.max_steps:
            row["eval_loss"] = dsm_eval(model, X, cfg.seed)
            if cfg.verbose:
                print(f"Step {step}/{cfg.max_steps} -- mean_loss = {row['eval_loss']:.4f}")
        rows.append(row)
    return model, pd.DataFrame(rows, columns=["step", "loss", "eval_loss"])
