import numpy as np
import pytest
from numpy.testing import assert_allclose

from genlearn.decomposition.ppca import ppca_fit, ppca_loglik
from genlearn.divergence.measures import relative_entropy
from genlearn.divergence.pmf import Pmf
from genlearn.metrics.cross_entropy import NATS_PER_BIT
from genlearn.mixture.gmm import GmmParams, gmm_posterior, gmm_sample
from genlearn.neural_networks.dense import Dense
from genlearn.neural_networks.nn import MlpParams
from genlearn.numcore.gradients import finite_diff_grad
from genlearn.numcore.quadrature import quad_1d
from genlearn.numcore.rng import Rng
from genlearn.statistics.gaussian import LOG_2PI, isotropic_logpdf
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import InvalidArgumentError, InvalidModelError
from genlearn.variational.elbo import ElboReport, elbo_tractable, gaussian_kl_std
from genlearn.variational.vae import (VaeModel, negative_elbo_given_encoding, vae_encode, vae_loss,
                                      vae_loss_and_grads, vae_sample, vae_train)


def _random_gmm(rng, d=3, M=2):
    weights = rng.uniform(0.1, 1.0, size=d)
    means = rng.normal(scale=2.0, size=(d, M))
    covs = []
    for _ in range(d):
        A = rng.normal(size=(M, M))
        covs.append(A @ A.T + 0.3 * np.eye(M))
    return GmmParams(weights / weights.sum(), means, np.array(covs))


def _linear_model(M=3, K=1, seed=0, decoder_var=0.1):
    return VaeModel.init(Rng(seed), M, K, hidden=(), decoder_var=decoder_var)


# -- gaussian_kl_std

def test_kl_of_standard_normal_is_zero():
    assert gaussian_kl_std(np.zeros(3), np.ones(3)) == 0.0


def test_kl_unit_shift():
    assert gaussian_kl_std(np.array([1.0]), np.array([1.0])) == pytest.approx(0.5, abs=1e-15)


def test_kl_matches_quadrature():
    rng = np.random.default_rng(0)
    for _ in range(5):
        mu, var = rng.normal(), rng.uniform(0.2, 3.0)

        def integrand(z):
            log_g = -0.5 * (LOG_2PI + np.log(var) + (z - mu) ** 2 / var)
            log_p = -0.5 * (LOG_2PI + z ** 2)
            return np.exp(log_g) * (log_g - log_p)

        lo, hi = mu - 15 * np.sqrt(var), mu + 15 * np.sqrt(var)
        assert gaussian_kl_std([mu], [var]) == pytest.approx(quad_1d(integrand, lo, hi, n=20_000), abs=1e-7)


def test_kl_is_non_negative_on_grid():
    mus, variances = np.meshgrid(np.linspace(-2, 2, 21), np.linspace(0.1, 3.0, 30))
    values = [gaussian_kl_std([m], [v]) for m, v in zip(mus.ravel(), variances.ravel())]
    assert min(values) >= -1e-12


def test_kl_rejects_non_positive_variance():
    with pytest.raises(InvalidArgumentError):
        gaussian_kl_std(np.zeros(2), np.array([1.0, 0.0]))


# -- elbo_tractable

def test_elbo_is_tight_at_the_posterior():
    rng = np.random.default_rng(1)
    model = _random_gmm(rng)
    x = rng.normal(size=2)
    report = elbo_tractable(model, x, gmm_posterior(model, x))
    assert abs(report.gap) < 1e-10
    assert report.elbo == pytest.approx(report.reconstruction - report.kl, abs=1e-12)


def test_elbo_is_loose_for_uniform_posterior():
    model = GmmParams([0.5, 0.5], [[-3.0, 0.0], [3.0, 0.0]], [np.eye(2), np.eye(2)])
    report = elbo_tractable(model, np.array([2.0, 0.0]), Pmf.uniform(2))
    assert report.gap > 0


def test_elbo_never_exceeds_loglik():
    rng = np.random.default_rng(2)
    for case in range(200):
        model = _random_gmm(rng)
        x = rng.normal(scale=3.0, size=2)
        g = Pmf.random(Rng(case), 3)
        report = elbo_tractable(model, x, g)
        assert report.elbo <= report.loglik + 1e-10


def test_gap_equals_relative_entropy_to_posterior():
    rng = np.random.default_rng(3)
    for case in range(20):
        model = _random_gmm(rng)
        x = rng.normal(size=2)
        g = Pmf.random(Rng(100 + case), 3)
        expected = relative_entropy(g, gmm_posterior(model, x)) * NATS_PER_BIT
        assert elbo_tractable(model, x, g).gap == pytest.approx(expected, abs=1e-10)


def test_report_in_bits():
    report = ElboReport(-2.0, 0.5, loglik=-1.0)
    bits = report.in_bits()
    assert bits.unit == "bits"
    assert bits.elbo == pytest.approx(-2.5 / np.log(2))
    assert bits.gap == pytest.approx(1.5 / np.log(2))


# -- VaeModel and vae_loss

def test_model_rejects_mismatched_halves():
    encoder = MlpParams.random(Rng(0), [3, 4])
    decoder = MlpParams.random(Rng(1), [1, 3])
    with pytest.raises(InvalidModelError):
        VaeModel(encoder, decoder)


def test_model_record_roundtrip():
    model = VaeModel.init(Rng(2), 3, 1, hidden=(5,))
    restored = VaeModel.from_dict(model.to_dict())
    assert np.array_equal(restored.flatten(), model.flatten())
    assert restored.K == 1 and restored.decoder_var == model.decoder_var


def test_degenerate_latent_gives_plain_gaussian_loglik():
    M, K, v = 3, 1, 0.5
    c = np.array([0.5, -1.0, 2.0])
    encoder = MlpParams([Dense(np.zeros((2 * K, 1 + M)))])
    decoder_weights = np.zeros((M, 1 + K))
    decoder_weights[:, 0] = c
    model = VaeModel(encoder, MlpParams([Dense(decoder_weights)]), decoder_var=v)
    X = np.random.default_rng(4).normal(size=(50, M))
    report = vae_loss(model, X, Rng(4), mc_samples=3)
    assert report.kl == 0.0
    assert report.reconstruction == pytest.approx(np.mean(isotropic_logpdf(X, c, v)), rel=1e-12)


def test_reconstruction_matches_linear_gaussian_expectation():
    model = _linear_model(M=3, K=2, seed=5)
    x = np.array([[0.3, -0.7, 1.1]])
    S = 10_000
    report = vae_loss(model, x, Rng(5, "recon"), mc_samples=S)
    mu, logvar = vae_encode(model, x)
    W = model.decoder.layers[0].weights
    b, D = W[:, 0], W[:, 1:]
    v = model.decoder_var
    resid = x[0] - D @ mu[0] - b
    expected = -(resid @ resid + np.trace(D @ np.diag(np.exp(logvar[0])) @ D.T)) / (2 * v) \
        - 0.5 * 3 * (LOG_2PI + np.log(v))
    # the same draws, one term per sample, give the standard error
    eps = Rng(5, "recon").normal((S, 1, 2))[:, 0, :]
    z = mu[0] + np.exp(logvar[0] / 2) * eps
    terms = isotropic_logpdf(z @ D.T + b, x[0], v)
    assert report.reconstruction == pytest.approx(terms.mean(), rel=1e-10)
    assert abs(report.reconstruction - expected) < 3 * terms.std() / np.sqrt(S)


def test_kl_term_is_exact():
    model = VaeModel.init(Rng(6), 4, 2, hidden=(3,))
    X = np.random.default_rng(6).normal(size=(10, 4))
    mu, logvar = vae_encode(model, X)
    report = vae_loss(model, X, Rng(6), mc_samples=2)
    assert report.kl == pytest.approx(gaussian_kl_std(mu, np.exp(logvar)) / 10, rel=1e-12)


def test_loss_is_deterministic_given_rng():
    model = VaeModel.init(Rng(7), 3, 1)
    X = np.random.default_rng(7).normal(size=(20, 3))
    assert vae_loss(model, X, Rng(8)).elbo == vae_loss(model, X, Rng(8)).elbo


def test_loss_needs_a_sample():
    with pytest.raises(InvalidArgumentError):
        vae_loss(_linear_model(), np.zeros((2, 3)), Rng(0), mc_samples=0)


# -- gradients on frozen noise

def test_gradient_wrt_encoder_outputs_matches_finite_differences():
    model = VaeModel.init(Rng(9), 3, 2, hidden=(4,))
    rng = np.random.default_rng(9)
    X = rng.normal(size=(5, 3))
    mu, logvar = rng.normal(size=(5, 2)), rng.normal(scale=0.3, size=(5, 2))
    eps = rng.normal(size=(3, 5, 2))
    _, d_mu, d_logvar, _ = negative_elbo_given_encoding(model, X, mu, logvar, eps)

    def neg_elbo(stacked):
        report, *_ = negative_elbo_given_encoding(model, X, stacked[:, :2], stacked[:, 2:], eps)
        return -report.elbo

    numeric = finite_diff_grad(neg_elbo, np.hstack((mu, logvar)), h=1e-6)
    analytic = np.hstack((d_mu, d_logvar))
    assert np.max(np.abs(numeric - analytic)) / np.max(np.abs(analytic)) < 1e-4


def test_gradient_wrt_weights_matches_finite_differences():
    model = VaeModel.init(Rng(10), 3, 1, hidden=(4,))
    rng = np.random.default_rng(10)
    X = rng.normal(size=(6, 3))
    eps = rng.normal(size=(2, 6, 1))
    _, analytic = vae_loss_and_grads(model, X, eps)
    numeric = finite_diff_grad(lambda theta: -vae_loss_and_grads(model.with_flat(theta), X, eps)[0].elbo,
                               model.flatten(), h=1e-6)
    assert np.max(np.abs(numeric - analytic)) / np.max(np.abs(analytic)) < 1e-4


# -- vae_train and vae_sample

def test_zero_learning_rate_gives_flat_trace():
    X = np.random.default_rng(11).normal(size=(40, 3))
    cfg = ExperimentConfig(seed=11, learning_rate=0.0, epochs=4, batch_size=8)
    model, trace = vae_train(X, 1, cfg)
    assert trace.shape == (5,)
    assert np.all(trace == trace[0])
    assert np.array_equal(model.flatten(), VaeModel.init(Rng(11, "vae/init"), 3, 1).flatten())


def test_training_is_deterministic_given_seed():
    X = np.random.default_rng(12).normal(size=(40, 3))
    cfg = ExperimentConfig(seed=12, learning_rate=0.01, epochs=2, batch_size=10)
    _, a = vae_train(X, 1, cfg)
    _, b = vae_train(X, 1, cfg)
    assert np.array_equal(a, b)


def test_latent_must_be_narrower_than_data():
    with pytest.raises(InvalidArgumentError):
        vae_train(np.zeros((10, 2)), 2, ExperimentConfig(seed=0))


def test_samples_have_data_width():
    model = VaeModel.init(Rng(13), 4, 2)
    assert vae_sample(model, Rng(14), 7).shape == (7, 4)


@pytest.mark.slow
def test_linear_vae_reaches_ppca_loglik():
    rng = np.random.default_rng(15)
    n = 1000
    X = rng.normal(size=(n, 1)) @ np.array([[2.0, 1.0]]) + np.sqrt(0.1) * rng.normal(size=(n, 2))
    baseline = ppca_loglik(ppca_fit(X, 1), X) / n
    cfg = ExperimentConfig(seed=15, learning_rate=0.003, epochs=200, batch_size=32)
    _, trace = vae_train(X, 1, cfg, hidden=())
    assert trace[-1] > baseline - 0.2
    assert trace[-1] < baseline + 0.05


@pytest.mark.slow
def test_decoder_samples_match_mixture_moments():
    truth = GmmParams([0.5, 0.5], [[-2.0, -1.0], [2.0, 1.0]], [0.3 * np.eye(2), 0.3 * np.eye(2)])
    X, _ = gmm_sample(truth, Rng(16), 1000)
    cfg = ExperimentConfig(seed=16, learning_rate=0.003, epochs=200, batch_size=32, momentum=0.5)
    model, _ = vae_train(X, 1, cfg, hidden=(16,))
    samples = vae_sample(model, Rng(17), 20_000)
    scale = np.abs(np.cov(X.T)).max()
    assert_allclose(samples.mean(axis=0), X.mean(axis=0), atol=0.15 * scale)
    assert_allclose(np.cov(samples.T), np.cov(X.T), atol=0.15 * scale)
