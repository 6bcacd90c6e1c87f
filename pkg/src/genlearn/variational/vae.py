"""
Variational autoencoder with a Gaussian encoder q(z|x) = N(mu(x), diag(exp(logvar(x)))), a
standard-normal prior and a Gaussian decoder p(x|z) = N(dec(z), decoder_var I). Training runs
gradient descent on the negative ELBO through the reparameterized draw z = mu + sigma * eps.
"""
from typing import Sequence, Tuple

import numpy as np

from genlearn.data.dataset import Dataset
from genlearn.neural_networks.nn import MlpParams, backprop, forward
from genlearn.neural_networks.optimizer import MomentumSGD, flat_grads
from genlearn.numcore.rng import Rng
from genlearn.statistics.gaussian import LOG_2PI
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import DivergenceError, InvalidArgumentError, InvalidModelError
from genlearn.variational.elbo import ElboReport, gaussian_kl_std

# number of frozen noise draws per example used to report the ELBO
EVAL_SAMPLES = 8


class VaeModel:

    """
    Encoder/decoder pair of a variational autoencoder with latent width K < M.
    """

    def __init__(self, encoder: MlpParams, decoder: MlpParams, decoder_var: float = 0.1):
        """
        Encoder/decoder pair of a variational autoencoder.

        Parameters
        ----------
        encoder: MlpParams
            Maps x (M,) to [mu, logvar] (2K,)
        decoder: MlpParams
            Maps z (K,) to the decoder mean (M,)
        decoder_var: float (default=0.1)
            The fixed isotropic variance of the decoder
        """
        self._check_init(encoder, decoder, decoder_var)
        self.encoder = encoder
        self.decoder = decoder
        self.decoder_var = float(decoder_var)

    @staticmethod
    def _check_init(encoder: MlpParams, decoder: MlpParams, decoder_var: float):
        if encoder.output_size != 2 * decoder.input_size:
            raise InvalidModelError("The encoder must output 2K values for a decoder taking K inputs.")
        if encoder.input_size != decoder.output_size:
            raise InvalidModelError("The encoder input and the decoder output must have the same width.")
        if decoder.input_size >= decoder.output_size:
            raise InvalidModelError("The latent width K must be smaller than the data width M.")
        if decoder_var <= 0:
            raise InvalidArgumentError("The value of 'decoder_var' must be positive.")

    @classmethod
    def init(cls,
             rng: Rng,
             M: int,
             K: int,
             hidden: Sequence[int] = (16,),
             activation: str = "tanh",
             decoder_var: float = 0.1) -> "VaeModel":
        """
        Returns a randomly initialised model; the encoder and decoder share the hidden widths.
        """
        encoder = MlpParams.random(rng.substream("encoder"), [M, *hidden, 2 * K], activation=activation)
        decoder = MlpParams.random(rng.substream("decoder"), [K, *hidden, M], activation=activation)
        return cls(encoder, decoder, decoder_var)

    @property
    def K(self) -> int:
        return self.decoder.input_size

    @property
    def M(self) -> int:
        return self.decoder.output_size

    def with_flat(self, theta: np.ndarray) -> "VaeModel":
        n_enc = self.encoder.flatten().size
        return VaeModel(self.encoder.with_flat(theta[:n_enc]), self.decoder.with_flat(theta[n_enc:]), self.decoder_var)

    def flatten(self) -> np.ndarray:
        return np.concatenate((self.encoder.flatten(), self.decoder.flatten()))

    def to_dict(self) -> dict:
        return {"encoder": self.encoder.to_dict(),
                "decoder": self.decoder.to_dict(),
                "latent_dim": self.K,
                "decoder_var": self.decoder_var}

    @classmethod
    def from_dict(cls, record: dict) -> "VaeModel":
        return cls(MlpParams.from_dict(record["encoder"]), MlpParams.from_dict(record["decoder"]), record["decoder_var"])

    def __repr__(self) -> str:
        return f"VaeModel(M={self.M}, K={self.K}, decoder_var={self.decoder_var:g})"


def _as_matrix(batch) -> np.ndarray:
    return np.atleast_2d(np.asarray(batch.X if isinstance(batch, Dataset) else batch, dtype=float))


def vae_encode(model: VaeModel, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Returns the variational means and log-variances (n, K) of every row of X.
    """
    out, _ = forward(model.encoder, _as_matrix(X))
    return out[:, :model.K], out[:, model.K:]


def negative_elbo_given_encoding(model: VaeModel,
                                 X: np.ndarray,
                                 mu: np.ndarray,
                                 logvar: np.ndarray,
                                 eps: np.ndarray) -> Tuple[ElboReport, np.ndarray, np.ndarray, list]:
    """
    Evaluates the ELBO (mean per example, nats) for given encoder outputs and frozen noise, and
    the gradients of the negative ELBO with respect to mu, logvar and the decoder weights.

    Parameters
    ----------
    model: VaeModel
        The model (only the decoder is used)
    X: np.ndarray
        The batch (n, M)
    mu: np.ndarray
        The variational means (n, K)
    logvar: np.ndarray
        The variational log-variances (n, K)
    eps: np.ndarray
        Standard-normal draws (S, n, K), one slice per Monte-Carlo sample
    """
    n, K = mu.shape
    S = eps.shape[0]
    sigma = np.exp(logvar / 2)
    z = (mu + sigma * eps).reshape(S * n, K)
    x_hat, cache = forward(model.decoder, z)
    resid = x_hat - np.tile(X, (S, 1))
    v = model.decoder_var
    reconstruction = -0.5 * (np.sum(resid ** 2) / v + resid.size * (LOG_2PI + np.log(v))) / (S * n)
    kl = gaussian_kl_std(mu, np.exp(logvar)) / n
    # gradient of -reconstruction through the decoder and the reparameterized draw
    grads_dec, d_z = backprop(model.decoder, cache, resid / v / (S * n))
    d_z = d_z.reshape(S, n, K)
    d_mu = d_z.sum(axis=0) + mu / n
    d_logvar = (d_z * eps).sum(axis=0) * sigma / 2 + (np.exp(logvar) - 1) / (2 * n)
    return ElboReport(reconstruction, kl), d_mu, d_logvar, grads_dec


def vae_loss_and_grads(model: VaeModel, X: np.ndarray, eps: np.ndarray) -> Tuple[ElboReport, np.ndarray]:
    """
    ELBO report of a batch on frozen noise eps (S, n, K) and the gradient of the negative ELBO
    with respect to every weight (encoder weights first, as in 'VaeModel.flatten').
    """
    X = _as_matrix(X)
    out, enc_cache = forward(model.encoder, X)
    mu, logvar = out[:, :model.K], out[:, model.K:]
    report, d_mu, d_logvar, grads_dec = negative_elbo_given_encoding(model, X, mu, logvar, eps)
    grads_enc, _ = backprop(model.encoder, enc_cache, np.hstack((d_mu, d_logvar)))
    return report, np.concatenate((flat_grads(grads_enc), flat_grads(grads_dec)))


def vae_loss(model: VaeModel, batch: np.ndarray, rng: Rng, mc_samples: int = 1) -> ElboReport:
    """
    Monte-Carlo ELBO (mean per example, nats) of a batch: the reconstruction term is averaged
    over 'mc_samples' reparameterized draws, the KL term is exact. Training descends on -elbo.

    Parameters
    ----------
    model: VaeModel
        The model
    batch: np.ndarray, Dataset
        The batch (n, M)
    rng: Rng
        The random number generator (its state advances)
    mc_samples: int (default=1)
        The number of draws per example
    """
    if mc_samples < 1:
        raise InvalidArgumentError("The value of 'mc_samples' must be a positive integer.")
    X = _as_matrix(batch)
    mu, logvar = vae_encode(model, X)
    eps = rng.normal((mc_samples, X.shape[0], model.K))
    report, *_ = negative_elbo_given_encoding(model, X, mu, logvar, eps)
    if not np.isfinite(report.elbo):
        raise DivergenceError(0, "The ELBO is not finite.")
    return report


def vae_eval(model: VaeModel, X: np.ndarray, seed: int, mc_samples: int = EVAL_SAMPLES) -> ElboReport:
    """
    ELBO of a dataset on noise frozen by 'seed', so that equal models give equal values.
    """
    return vae_loss(model, X, Rng(seed, "vae/eval"), mc_samples)


def vae_train(ds,
              latent_dim: int,
              cfg: ExperimentConfig,
              hidden: Sequence[int] = (16,),
              activation: str = "tanh",
              decoder_var: float = 0.1) -> Tuple[VaeModel, np.ndarray]:
    """
    Trains a VAE by minibatch SGD (with momentum) on the negative ELBO. Returns the model and
    the ELBO trace (mean per example, nats, frozen evaluation noise): before training, then after
    every epoch.

    Parameters
    ----------
    ds: Dataset, np.ndarray
        The data (n, M)
    latent_dim: int
        The latent width K < M
    cfg: ExperimentConfig
        Seed, learning rate, momentum, epochs, batch size and mc_samples
    hidden: tuple (default=(16,))
        Hidden widths of both networks
    activation: str (default="tanh")
        Hidden activation of both networks
    decoder_var: float (default=0.1)
        The fixed decoder variance
    """
    X = _as_matrix(ds)
    n, M = X.shape
    if not 1 <= latent_dim < M:
        raise InvalidArgumentError("The latent width must satisfy 1 <= K < M.")
    batch_size = min(cfg.batch_size, n)
    model = VaeModel.init(Rng(cfg.seed, "vae/init"), M, latent_dim, hidden, activation, decoder_var)
    shuffle = Rng(cfg.seed, "vae/shuffle")
    noise = Rng(cfg.seed, "vae/noise")
    optimizer = MomentumSGD(cfg.learning_rate, cfg.momentum)
    theta = model.flatten()
    trace = [vae_eval(model, X, cfg.seed).elbo]
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            eps = noise.normal((cfg.mc_samples, len(idx), latent_dim))
            report, grad = vae_loss_and_grads(model.with_flat(theta), X[idx], eps)
            if not np.isfinite(report.elbo):
                raise DivergenceError(optimizer.n_steps + 1, "The ELBO is not finite.")
            theta = optimizer.step(theta, grad)
        model = model.with_flat(theta)
        elbo = vae_eval(model, X, cfg.seed).elbo
        if not np.isfinite(elbo):
            raise DivergenceError(optimizer.n_steps, "The ELBO is not finite.")
        trace.append(elbo)
        if cfg.verbose:
            print(f"Epoch {epoch}/{cfg.epochs} -- mean_loss = {-elbo:.4f}")
    return model, np.array(trace)


def vae_sample(model: VaeModel, rng: Rng, n: int) -> np.ndarray:
    """
    Draws n points: z ~ N(0, I), then x = dec(z) + sqrt(decoder_var) * eps.
    """
    z = rng.normal((n, model.K))
    mean, _ = forward(model.decoder, z)
    return mean + np.sqrt(model.decoder_var) * rng.normal((n, model.M))
