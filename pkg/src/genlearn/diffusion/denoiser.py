"""
Denoising networks and the per-step objective. A network sees (z_t, t/T, sqrt(alpha_t)) and
emits either the backward mean mu_t(z_t) ('mean' mode) or a noise estimate v_t(z_t) ('noise'
mode); 'mean_from_output' maps both onto mu_t. Anything with a 'mode' attribute and an
'output(s, z, t)' method can stand in for a network.
"""
from typing import Optional, Sequence, Tuple

import numpy as np

from genlearn.diffusion.schedule import DiffusionSchedule, forward_marginal, posterior_mean
from genlearn.neural_networks.nn import MlpParams, forward
from genlearn.numcore.rng import Rng
from genlearn.statistics.gaussian import LOG_2PI
from genlearn.utils.exceptions import InvalidArgumentError, InvalidModelError

MODES = ("mean", "noise")
# backward variances the weighted objective can use
VARIANCES = ("beta", "posterior")


class Standardizer:

    """
    Shifts and scales every coordinate to zero mean and unit variance.
    """

    def __init__(self):
        """
        Shifts and scales every coordinate to zero mean and unit variance.

        Attributes
        ----------
        fitted: bool
            Whether the standardizer is already fitted
        mean: np.ndarray
            The per-coordinate means
        scale: np.ndarray
            The per-coordinate standard deviations (1 where a coordinate is constant)
        """
        self.fitted = False
        self.mean = None
        self.scale = None

    def fit(self, X: np.ndarray) -> "Standardizer":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        self.mean = X.mean(axis=0)
        scale = X.std(axis=0)
        self.scale = np.where(scale > 0, scale, 1.0)
        self.fitted = True
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        if not self.fitted:
            raise Warning("Fit 'Standardizer' before calling 'transform'.")
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def inverse_transform(self, Z: np.ndarray) -> np.ndarray:
        if not self.fitted:
            raise Warning("Fit 'Standardizer' before calling 'inverse_transform'.")
        return np.asarray(Z, dtype=float) * self.scale + self.mean

    def fit_transform(self, X: np.ndarray) -> np.ndarray:
        return self.fit(X).transform(X)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, record: dict) -> "Standardizer":
        standardizer = cls()
        standardizer.mean = np.array(record["mean"], dtype=float)
        standardizer.scale = np.array(record["scale"], dtype=float)
        standardizer.fitted = True
        return standardizer


def time_features(s: DiffusionSchedule, t: int, n: int) -> np.ndarray:
    """
    The time embedding (t/T, sqrt(alpha_t)) repeated over n rows.
    """
    return np.tile([t / s.T, np.sqrt(s.alpha[t])], (n, 1))


class DenoiserNet:

    """
    An MLP over [z_t, t/T, sqrt(alpha_t)] with output width K, its parameterization mode and the
    standardizer of the data it was trained on (None when the data were used as is).
    """

    def __init__(self, net: MlpParams, mode: str = "noise", standardizer: Optional[Standardizer] = None):
        """
        An MLP denoiser.

        Parameters
        ----------
        net: MlpParams
            Input width K + 2, output width K, Gaussian (identity) head
        mode: str (default="noise")
            'mean' (the net predicts mu_t) or 'noise' (the net predicts the forward noise)
        standardizer: Standardizer (default=None)
            The transform from data space to the space the net works in
        """
        self._check_init(net, mode)
        self.net = net
        self.mode = mode
        self.standardizer = standardizer

    @staticmethod
    def _check_init(net: MlpParams, mode: str):
        if mode not in MODES:
            raise InvalidArgumentError(f"The value of 'mode' must be in {{{', '.join(MODES)}}}.")
        if net.head != "gaussian_regression":
            raise InvalidModelError("A denoiser needs the identity ('gaussian_regression') head.")
        if net.input_size != net.output_size + 2:
            raise InvalidModelError("A denoiser takes K + 2 inputs (z_t, t/T, sqrt(alpha_t)) and emits K outputs.")

    @classmethod
    def random(cls,
               rng: Rng,
               dim: int,
               hidden: Sequence[int] = (32, 32),
               activation: str = "tanh",
               mode: str = "noise",
               standardizer: Optional[Standardizer] = None) -> "DenoiserNet":
        return cls(MlpParams.random(rng, [dim + 2, *hidden, dim], activation=activation), mode, standardizer)

    @property
    def dim(self) -> int:
        return self.net.output_size

    def with_net(self, net: MlpParams) -> "DenoiserNet":
        return DenoiserNet(net, self.mode, self.standardizer)

    def inputs(self, s: DiffusionSchedule, z: np.ndarray, t: int) -> np.ndarray:
        z = np.atleast_2d(z)
        return np.hstack((z, time_features(s, t, z.shape[0])))

    def output(self, s: DiffusionSchedule, z: np.ndarray, t: int) -> np.ndarray:
        out, _ = forward(self.net, self.inputs(s, z, t))
        return out if np.ndim(z) > 1 else out[0]

    def mean(self, s: DiffusionSchedule, z: np.ndarray, t: int) -> np.ndarray:
        return mean_from_output(s, self.mode, self.output(s, z, t), z, t)

    def to_dict(self) -> dict:
        return {"net": self.net.to_dict(),
                "mode": self.mode,
                "standardizer": None if self.standardizer is None else self.standardizer.to_dict()}

    @classmethod
    def from_dict(cls, record: dict) -> "DenoiserNet":
        standardizer = record.get("standardizer")
        return cls(MlpParams.from_dict(record["net"]), record["mode"],
                   None if standardizer is None else Standardizer.from_dict(standardizer))

    def __repr__(self) -> str:
        return f"DenoiserNet({self.net!r}, mode={self.mode})"


class LinearDenoiser:

    """
    A mean-mode denoiser mu_t(z) = a_t z + b_t with one (a_t, b_t) pair per step. Its ELBO and
    likelihood have closed forms (see 'tractable_elbo_gap').
    """

    mode = "mean"

    def __init__(self, a: Sequence[float], b: Sequence[float], dim: int = 1):
        """
        Parameters
        ----------
        a: list
            Slopes a_1..a_T
        b: list
            Offsets b_1..b_T
        dim: int (default=1)
            The data width (the same map acts on every coordinate)
        """
        self.dim = dim
        a, b = np.array(a, dtype=float).ravel(), np.array(b, dtype=float).ravel()
        if a.size != b.size:
            raise InvalidModelError("The slopes and offsets must have the same length.")
        self.a = np.concatenate(([np.nan], a))
        self.b = np.concatenate(([np.nan], b))

    @classmethod
    def matched(cls, s: DiffusionSchedule, mean: float = 0.0, var: float = 1.0) -> "LinearDenoiser":
        """
        The exact backward means E[z_{t-1}|z_t] of 1-D N(mean, var) data under the forward chain.
        """
        a, b = [], []
        for t in range(1, s.T + 1):
            # joint moments of (z_{t-1}, z_t) with z_0 = x
            m_prev, m_t = np.sqrt(s.alpha[t - 1]) * mean, np.sqrt(s.alpha[t]) * mean
            v_prev = s.alpha[t - 1] * var + 1.0 - s.alpha[t - 1]
            v_t = s.alpha[t] * var + 1.0 - s.alpha[t]
            cov = np.sqrt(1.0 - s.beta[t]) * v_prev
            a.append(cov / v_t)
            b.append(m_prev - cov / v_t * m_t)
        return cls(a, b)

    def output(self, s: DiffusionSchedule, z: np.ndarray, t: int) -> np.ndarray:
        return self.a[t] * np.asarray(z, dtype=float) + self.b[t]

    def mean(self, s: DiffusionSchedule, z: np.ndarray, t: int) -> np.ndarray:
        return self.output(s, z, t)


def mean_from_output(s: DiffusionSchedule, mode: str, out: np.ndarray, z: np.ndarray, t: int) -> np.ndarray:
    """
    Backward mean implied by a network output: the output itself in 'mean' mode and
    (z_t - beta_t / sqrt(1 - alpha_t) v_t) / sqrt(1 - beta_t) in 'noise' mode.
    """
    if mode == "mean":
        return out
    beta = s.beta[t]
    return (np.asarray(z, dtype=float) - beta / np.sqrt(1.0 - s.alpha[t]) * out) / np.sqrt(1.0 - beta)


def elbo_variance(s: DiffusionSchedule, t: int, variance: str = "beta") -> float:
    """
    Variance of the backward Gaussian in the weighted objective at step t: beta_t ('beta') or the
    exact posterior variance sigma2_t ('posterior'). Both equal beta_1 at t = 1.
    """
    if variance not in VARIANCES:
        raise InvalidArgumentError(f"The value of 'variance' must be in {{{', '.join(VARIANCES)}}}.")
    t = s.check_step(t)
    return float(s.beta[t]) if variance == "beta" else s.posterior_variance(t)


def noise_weight(s: DiffusionSchedule, t: int, variance: str = "beta") -> float:
    """
    Factor c_t with ||m_t - mu_t||^2 / (2 v) = c_t ||v_t - w||^2, where v is 'elbo_variance'. With
    the default v = beta_t this is beta_t / (2 (1 - alpha_t) (1 - beta_t)).
    """
    beta = s.beta[s.check_step(t)]
    return beta ** 2 / ((1.0 - beta) * (1.0 - s.alpha[t])) / (2.0 * elbo_variance(s, t, variance))


def denoising_loss_terms(net, s: DiffusionSchedule, x: np.ndarray, z: np.ndarray, w: np.ndarray, t: int,
                         weighted: bool = False, variance: str = "beta") -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-row loss at step t on frozen (z_t, w), and its gradient with respect to the raw network
    output.

    Unweighted: ||m_t - mu_t||^2 in 'mean' mode and ||v_t - w||^2 in 'noise' mode. Weighted: the
    negative ELBO term ||m_t - mu_t||^2 / (2 v) with v from 'elbo_variance', plus the Gaussian
    normalizer at t = 1 where the term is the reconstruction -ln N(x; mu_1(z_1), beta_1 I).

    Parameters
    ----------
    net: DenoiserNet
        The denoiser (or any object with 'mode' and 'output')
    s: DiffusionSchedule
        The schedule
    x: np.ndarray
        The data (n, K)
    z: np.ndarray
        The noisy points z_t (n, K)
    w: np.ndarray
        The forward noise that produced z (n, K)
    t: int
        The step, in [1, T]
    weighted: bool (default=False)
        Whether to return the ELBO-weighted term
    variance: str (default="beta")
        Backward variance of the weighted term: 'beta' (beta_t) or 'posterior' (sigma2_t)
    """
    t = s.check_step(t)
    out = np.atleast_2d(net.output(s, z, t))
    x, z, w = np.atleast_2d(x), np.atleast_2d(z), np.atleast_2d(w)
    if net.mode == "mean":
        resid = out - posterior_mean(s, x, z, t)
        scale = 1.0 / (2.0 * elbo_variance(s, t, variance)) if weighted else 1.0
    else:
        resid = out - w
        scale = noise_weight(s, t, variance) if weighted else 1.0
    terms = scale * np.sum(resid ** 2, axis=1)
    if weighted and t == 1:
        terms = terms + 0.5 * x.shape[1] * (LOG_2PI + np.log(s.beta[1]))
    return terms, 2.0 * scale * resid


def denoising_loss(net, s: DiffusionSchedule, x: np.ndarray, z: np.ndarray, w: np.ndarray, t: int,
                   weighted: bool = False, variance: str = "beta") -> float:
    """
    Mean over rows of 'denoising_loss_terms'.
    """
    terms, _ = denoising_loss_terms(net, s, x, z, w, t, weighted, variance)
    return float(np.mean(terms))


def diffusion_loss(net, s: DiffusionSchedule, x: np.ndarray, t: int, rng: Rng, weighted: bool = False,
                   variance: str = "beta") -> float:
    """
    Draws (z_t, w) from the forward marginal and returns the denoising loss at step t (mean over
    rows when x is a batch).

    Parameters
    ----------
    net: DenoiserNet
        The denoiser
    s: DiffusionSchedule
        The schedule
    x: np.ndarray
        A data vector (K,) or a batch (n, K), in the space the net works in
    t: int
        The step, in [1, T]
    rng: Rng
        The random number generator (its state advances)
    weighted: bool (default=False)
        Whether to apply the ELBO weighting
    variance: str (default="beta")
        Backward variance of the weighted term (see 'elbo_variance')
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    z, w = forward_marginal(s, x, t, rng)
    return denoising_loss(net, s, x, z, w, t, weighted, variance)
