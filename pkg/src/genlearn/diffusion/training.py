from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from genlearn.data.dataset import Dataset
from genlearn.diffusion.denoiser import VARIANCES, DenoiserNet, Standardizer, denoising_loss, denoising_loss_terms
from genlearn.diffusion.schedule import DiffusionSchedule, forward_marginal
from genlearn.neural_networks.nn import backprop, forward
from genlearn.neural_networks.optimizer import MomentumSGD, flat_grads
from genlearn.numcore.rng import Rng
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import DivergenceError, InvalidArgumentError

# rows of the data used by the frozen-noise evaluation loss
EVAL_ROWS = 256
# number of evaluation points along a run
EVAL_POINTS = 20


def diffusion_eval_loss(net, s: DiffusionSchedule, X: np.ndarray, seed: int, weighted: bool = False,
                        variance: str = "beta") -> float:
    """
    Denoising loss averaged over every step t = 1..T and the rows of X, on noise frozen by
    'seed' so that equal networks give equal values.

    Parameters
    ----------
    net: DenoiserNet
        The denoiser
    s: DiffusionSchedule
        The schedule
    X: np.ndarray
        Data in the space the net works in (n, K)
    seed: int
        Seed of the frozen noise
    weighted: bool (default=False)
        Whether to apply the ELBO weighting
    variance: str (default="beta")
        Backward variance of the weighted loss (see 'elbo_variance')
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))[:EVAL_ROWS]
    rng = Rng(seed, "diffusion/eval")
    total = 0.0
    for t in range(1, s.T + 1):
        z, w = forward_marginal(s, X, t, rng)
        total += denoising_loss(net, s, X, z, w, t, weighted, variance)
    return total / s.T


def _train_step(net: DenoiserNet, s: DiffusionSchedule, x: np.ndarray, z: np.ndarray, w: np.ndarray,
                t: int, weighted: bool, variance: str) -> Tuple[float, np.ndarray]:
    """
    Mean loss over the batch and its gradient with respect to the flat weights of the net.
    """
    terms, d_out = denoising_loss_terms(net, s, x, z, w, t, weighted, variance)
    _, cache = forward(net.net, net.inputs(s, z, t))
    grads, _ = backprop(net.net, cache, d_out / x.shape[0])
    return float(np.mean(terms)), flat_grads(grads)


def diffusion_train(ds,
                    s: DiffusionSchedule,
                    cfg: ExperimentConfig,
                    hidden: Sequence[int] = (32, 32),
                    mode: str = "noise",
                    weighted: bool = False,
                    activation: str = "tanh",
                    variance: str = "beta") -> Tuple[DenoiserNet, pd.DataFrame]:
    """
    Trains a denoiser: at every step draw a minibatch, a step t uniform on {1..T} and the noise w,
    form z_t from the forward marginal and take a gradient step on the denoising loss. The data
    are standardized first; the standardizer travels with the returned net.

    Returns the net and a trace with one row per step: 'step', 't', 'loss' (minibatch loss) and
    'eval_loss' (frozen-noise loss over all steps, filled at regular intervals, NaN elsewhere).

    Parameters
    ----------
    ds: Dataset, np.ndarray
        The data (n, K)
    s: DiffusionSchedule
        The schedule
    cfg: ExperimentConfig
        Seed, learning rate, momentum, max_steps and batch size
    hidden: tuple (default=(32, 32))
        Hidden widths of the denoiser
    mode: str (default="noise")
        'mean' or 'noise' parameterization
    weighted: bool (default=False)
        Whether to descend on the ELBO-weighted loss instead of the plain squared error
    activation: str (default="tanh")
        Hidden activation
    variance: str (default="beta")
        Backward variance of the weighted loss: 'beta' or 'posterior'
    """
    X = np.atleast_2d(np.asarray(ds.X if isinstance(ds, Dataset) else ds, dtype=float))
    n, K = X.shape
    if variance not in VARIANCES:
        raise InvalidArgumentError(f"The value of 'variance' must be in {{{', '.join(VARIANCES)}}}.")
    if n < 2:
        raise InvalidArgumentError("Training a denoiser needs at least two points.")
    standardizer = Standardizer()
    X = standardizer.fit_transform(X)
    net = DenoiserNet.random(Rng(cfg.seed, "diffusion/init"), K, hidden, activation, mode, standardizer)
    batches = Rng(cfg.seed, "diffusion/batch")
    times = Rng(cfg.seed, "diffusion/time")
    noise = Rng(cfg.seed, "diffusion/noise")
    batch_size = min(cfg.batch_size, n)
    eval_every = max(1, cfg.max_steps // EVAL_POINTS)
    optimizer = MomentumSGD(cfg.learning_rate, cfg.momentum)
    theta = net.net.flatten()
    eval_loss = diffusion_eval_loss(net, s, X, cfg.seed, weighted, variance)
    rows = [{"step": 0, "t": 0, "loss": np.nan, "eval_loss": eval_loss}]
    for step in range(1, cfg.max_steps + 1):
        x = X[batches.integers(n, size=batch_size)]
        t = int(times.integers(s.T)) + 1
        z, w = forward_marginal(s, x, t, noise)
        loss, grad = _train_step(net, s, x, z, w, t, weighted, variance)
        if not np.isfinite(loss):
            raise DivergenceError(step, "The denoising loss is not finite.")
        theta = optimizer.step(theta, grad)
        net = net.with_net(net.net.with_flat(theta))
        row = {"step": step, "t": t, "loss": loss, "eval_loss": np.nan}
        if step % eval_every == 0 or step == cfg.max_steps:
            row["eval_loss"] = diffusion_eval_loss(net, s, X, cfg.seed, weighted, variance)
            if cfg.verbose:
                print(f"Step {step}/{cfg.max_steps} -- mean_loss = {row['eval_loss']:.4f}")
        rows.append(row)
    return net, pd.DataFrame(rows, columns=["step", "t", "loss", "eval_loss"])


def diffusion_sample(net, s: DiffusionSchedule, rng: Rng, n: Optional[int] = None) -> np.ndarray:
    """
    Ancestral sampling: z_T ~ N(0, I), z_{t-1} = mu_t(z_t) + sqrt(beta'_t) u_t for t = T..2, and
    x = mu_1(z_1) + sqrt(beta'_1) u_1, mapped back through the net's standardizer if it has one.

    Parameters
    ----------
    net: DenoiserNet
        The denoiser (or any object with 'mode', 'output' and 'mean')
    s: DiffusionSchedule
        The schedule
    rng: Rng
        The random number generator (its state advances)
    n: int (default=None)
        Number of samples; None returns a single vector
    """
    dim = net.dim
    z = rng.normal((1 if n is None else n, dim))
    for t in range(s.T, 0, -1):
        z = net.mean(s, z, t) + np.sqrt(s.beta_prime[t]) * rng.normal(z.shape)
    standardizer = getattr(net, "standardizer", None)
    if standardizer is not None:
        z = standardizer.inverse_transform(z)
    return z[0] if n is None else z
