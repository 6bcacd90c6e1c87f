"""
Generative adversarial network: a generator g(z), z ~ N(0, I), and a discriminator d(x) in (0, 1)
trained against each other on the value function E_data[log d(X)] + E_model[log(1 - d(X))].
The discriminator ascends it, the generator descends its second term.
"""
import warnings
from typing import Callable, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from genlearn.data.dataset import Dataset
from genlearn.metrics.cross_entropy import NATS_PER_BIT
from genlearn.neural_networks.nn import MlpParams, backprop, forward
from genlearn.neural_networks.optimizer import MomentumSGD, flat_grads
from genlearn.numcore.rng import Rng
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import DivergenceError, InvalidArgumentError, InvalidModelError

# discriminator outputs are clamped to [CLAMP, 1 - CLAMP] before logs
CLAMP = 1e-6
MAX_HALVINGS = 40


class GanModel:

    """
    Generator/discriminator pair of a GAN.
    """

    def __init__(self, generator: MlpParams, discriminator: MlpParams):
        """
        Generator/discriminator pair of a GAN.

        Parameters
        ----------
        generator: MlpParams
            Maps z (K,) to x (M,), identity head
        discriminator: MlpParams
            Maps x (M,) to one logit, 'bernoulli' (logistic) head
        """
        self._check_init(generator, discriminator)
        self.generator = generator
        self.discriminator = discriminator

    @staticmethod
    def _check_init(generator: MlpParams, discriminator: MlpParams):
        if generator.head != "gaussian_regression":
            raise InvalidModelError("The generator needs the identity ('gaussian_regression') head.")
        if discriminator.head != "bernoulli":
            raise InvalidModelError("The discriminator needs the logistic ('bernoulli') head.")
        if generator.output_size != discriminator.input_size:
            raise InvalidModelError("The generator output and the discriminator input must have the same width.")

    @classmethod
    def init(cls,
             rng: Rng,
             M: int,
             K: int,
             generator_hidden: Sequence[int] = (16,),
             discriminator_hidden: Sequence[int] = (16,),
             activation: str = "tanh") -> "GanModel":
        generator = MlpParams.random(rng.substream("generator"), [K, *generator_hidden, M], activation=activation)
        discriminator = MlpParams.random(rng.substream("discriminator"), [M, *discriminator_hidden, 1],
                                         activation=activation, head="bernoulli")
        return cls(generator, discriminator)

    @property
    def K(self) -> int:
        return self.generator.input_size

    @property
    def M(self) -> int:
        return self.generator.output_size

    def to_dict(self) -> dict:
        return {"generator": self.generator.to_dict(), "discriminator": self.discriminator.to_dict()}

    @classmethod
    def from_dict(cls, record: dict) -> "GanModel":
        return cls(MlpParams.from_dict(record["generator"]), MlpParams.from_dict(record["discriminator"]))

    def __repr__(self) -> str:
        return f"GanModel(K={self.K}, M={self.M})"


def _as_matrix(X) -> np.ndarray:
    return np.atleast_2d(np.asarray(X.X if isinstance(X, Dataset) else X, dtype=float))


def discriminator_probs(discriminator: MlpParams, X: np.ndarray) -> np.ndarray:
    """
    Discriminator outputs d(x) for every row of X, clamped to [1e-6, 1 - 1e-6].
    """
    probs, _ = forward(discriminator, _as_matrix(X))
    return np.clip(probs[:, 0], CLAMP, 1.0 - CLAMP)


def value_function(d: Union[MlpParams, Callable[[np.ndarray], np.ndarray]], data: np.ndarray,
                   fake: np.ndarray) -> float:
    """
    Empirical value E_data[log2 d(X)] + E_model[log2(1 - d(X))] in bits. A network is clamped as in
    training; a callable is used as is, so a saturated output gives 0 or -inf.

    Parameters
    ----------
    d: MlpParams, callable
        The discriminator, or any function mapping a batch to probabilities
    data: np.ndarray
        A batch from the data distribution
    fake: np.ndarray
        A batch from the model distribution
    """
    if len(data) == 0 or len(fake) == 0:
        raise InvalidArgumentError("Both batches must be non-empty.")
    if isinstance(d, MlpParams):
        d_data, d_fake = discriminator_probs(d, data), discriminator_probs(d, fake)
    else:
        d_data = np.asarray(d(np.asarray(data)), dtype=float).ravel()
        d_fake = np.asarray(d(np.asarray(fake)), dtype=float).ravel()
    with np.errstate(divide="ignore"):
        return float(np.mean(np.log2(d_data)) + np.mean(np.log2(1.0 - d_fake)))


def _discriminator_grad(discriminator: MlpParams, data: np.ndarray, fake: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Objective (nats) of the discriminator and its gradient, for ascent. Clamped outputs have zero
    gradient.
    """
    X = np.vstack((data, fake))
    probs, cache = forward(discriminator, X)
    probs = probs[:, 0]
    n_data, n_fake = len(data), len(fake)
    clamped = (probs < CLAMP) | (probs > 1.0 - CLAMP)
    p = np.clip(probs, CLAMP, 1.0 - CLAMP)
    objective = np.mean(np.log(p[:n_data])) + np.mean(np.log(1.0 - p[n_data:]))
    d_logits = np.concatenate(((1.0 - probs[:n_data]) / n_data, -probs[n_data:] / n_fake))
    d_logits[clamped] = 0.0
    grads, _ = backprop(discriminator, cache, d_logits.reshape(-1, 1))
    return float(objective), flat_grads(grads)


def generator_grad(model: GanModel, z: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Generator objective mean log(1 - d(g(z))) (nats) and its gradient with respect to the generator
    weights, through the frozen discriminator.
    """
    fake, g_cache = forward(model.generator, z)
    probs, d_cache = forward(model.discriminator, fake)
    probs = probs[:, 0]
    clamped = (probs < CLAMP) | (probs > 1.0 - CLAMP)
    objective = np.mean(np.log(1.0 - np.clip(probs, CLAMP, 1.0 - CLAMP)))
    # d/da log(1 - sigmoid(a)) = -sigmoid(a)
    d_logits = np.where(clamped, 0.0, -probs / len(probs)).reshape(-1, 1)
    _, d_fake = backprop(model.discriminator, d_cache, d_logits)
    grads, _ = backprop(model.generator, g_cache, d_fake)
    return float(objective), flat_grads(grads)


def discriminator_step(discriminator: MlpParams, data: np.ndarray, fake: np.ndarray, learning_rate: float,
                       backtracking: bool = True, step: int = 0) -> Tuple[MlpParams, float, float]:
    """
    One gradient ascent step of the discriminator on a fixed pair of batches. With backtracking,
    the step is halved until the objective does not decrease. Returns the new discriminator and
    the objective (nats) before and after.
    """
    before, grad = _discriminator_grad(discriminator, data, fake)
    if not np.isfinite(before) or not np.all(np.isfinite(grad)):
        raise DivergenceError(step, "The discriminator gradient is not finite.")
    theta = discriminator.flatten()
    lr = learning_rate
    candidate = discriminator.with_flat(theta + lr * grad)
    after = _discriminator_grad(candidate, data, fake)[0]
    halvings = 0
    while backtracking and not after >= before and halvings < MAX_HALVINGS:
        lr /= 2
        halvings += 1
        candidate = discriminator.with_flat(theta + lr * grad)
        after = _discriminator_grad(candidate, data, fake)[0]
    if backtracking and not after >= before:
        warnings.warn(f"Backtracking exhausted at step {step}; the discriminator is left unchanged.", Warning)
        return discriminator, before, before
    return candidate, before, after


def gan_train_step(model: GanModel, data: np.ndarray, rng: Rng, cfg: ExperimentConfig,
                   g_optimizer: MomentumSGD = None, step: int = 0) -> Tuple[GanModel, dict]:
    """
    One round of the two-player game: a discriminator ascent step on a fresh generated batch, then a
    generator descent step on log(1 - d(g(z))) with another fresh z draw. Returns the new model and
    the trace entry {'step', 'd_obj', 'g_obj'} (bits).

    Parameters
    ----------
    model: GanModel
        The current model
    data: np.ndarray
        A data batch (n, M)
    rng: Rng
        Source of the latent draws (its state advances)
    cfg: ExperimentConfig
        Learning rates (cfg.learning_rate for the discriminator, cfg.generator_lr for the generator)
        and the backtracking switch
    g_optimizer: MomentumSGD (default=None)
        The generator's optimizer (keeps its momentum between steps); a fresh one when None
    step: int (default=0)
        The step index reported in errors and warnings
    """
    data = _as_matrix(data)
    n = data.shape[0]
    if n < 1:
        raise InvalidArgumentError("The batch must hold at least one point.")
    g_optimizer = g_optimizer or MomentumSGD(cfg.generator_lr, cfg.momentum)
    fake, _ = forward(model.generator, rng.normal((n, model.K)))
    discriminator, _, d_obj = discriminator_step(model.discriminator, data, fake, cfg.learning_rate,
                                                 cfg.backtracking, step)
    model = GanModel(model.generator, discriminator)
    g_obj, grad = generator_grad(model, rng.normal((n, model.K)))
    if not np.isfinite(g_obj):
        raise DivergenceError(step, "The generator objective is not finite.")
    theta = g_optimizer.step(model.generator.flatten(), grad)
    model = GanModel(model.generator.with_flat(theta), discriminator)
    return model, {"step": step, "d_obj": d_obj / NATS_PER_BIT, "g_obj": g_obj / NATS_PER_BIT}


def gan_train(ds,
              cfg: ExperimentConfig,
              latent_dim: int = 1,
              generator_hidden: Sequence[int] = (16,),
              discriminator_hidden: Sequence[int] = (16,),
              activation: str = "tanh") -> Tuple[GanModel, pd.DataFrame]:
    """
    Trains a GAN for cfg.max_steps rounds of 'gan_train_step' on minibatches drawn with
    replacement. The data are used as given (standardize them beforehand if needed). Returns the
    model and the trace (columns 'step', 'd_obj', 'g_obj', in bits).

    Parameters
    ----------
    ds: Dataset, np.ndarray
        The data (n, M)
    cfg: ExperimentConfig
        Seed, learning rates, max_steps, batch size, momentum and backtracking
    latent_dim: int (default=1)
        The latent width K
    generator_hidden: tuple (default=(16,))
        Hidden widths of the generator (empty for a linear generator)
    discriminator_hidden: tuple (default=(16,))
        Hidden widths of the discriminator
    activation: str (default="tanh")
        Hidden activation of both networks
    """
    X = _as_matrix(ds)
    n, M = X.shape
    if latent_dim < 1:
        raise InvalidArgumentError("The value of 'latent_dim' must be a positive integer.")
    model = GanModel.init(Rng(cfg.seed, "gan/init"), M, latent_dim, generator_hidden, discriminator_hidden, activation)
    batches = Rng(cfg.seed, "gan/batch")
    latents = Rng(cfg.seed, "gan/latent")
    g_optimizer = MomentumSGD(cfg.generator_lr, cfg.momentum)
    batch_size = min(cfg.batch_size, n)
    report_every = max(1, cfg.max_steps // 20)
    rows = []
    for step in range(1, cfg.max_steps + 1):
        batch = X[batches.integers(n, size=batch_size)]
        model, row = gan_train_step(model, batch, latents, cfg, g_optimizer, step)
        rows.append(row)
        if cfg.verbose and step % report_every == 0:
            print(f"Step {step}/{cfg.max_steps} -- d_obj = {row['d_obj']:.4f}, g_obj = {row['g_obj']:.4f}")
    return model, pd.DataFrame(rows, columns=["step", "d_obj", "g_obj"])


def gan_sample(model: GanModel, rng: Rng, n: int) -> np.ndarray:
    """
    Draws n points g(z), z ~ N(0, I).
    """
    samples, _ = forward(model.generator, rng.normal((n, model.K)))
    return samples
