import numpy as np
import pytest
from numpy.testing import assert_allclose

from genlearn.diffusion.denoiser import (DenoiserNet, LinearDenoiser, Standardizer, denoising_loss, diffusion_loss,
                                         elbo_variance, noise_weight)
from genlearn.diffusion.elbo_gap import model_loglik, tractable_elbo_gap
from genlearn.diffusion.schedule import (DiffusionSchedule, backward_posterior, forward_marginal, forward_step,
                                         make_schedule, posterior_coefficients, posterior_mean, tweedie_mean)
from genlearn.diffusion.score_bridge import elbo_score_gap, score_from_mean, score_matching_losses
from genlearn.diffusion.training import diffusion_eval_loss, diffusion_sample, diffusion_train
from genlearn.mixture.gmm import GmmParams, gmm_sample
from genlearn.neural_networks.dense import Dense
from genlearn.neural_networks.nn import MlpParams
from genlearn.numcore.rng import Rng
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import InvalidArgumentError, InvalidScheduleError


class PosteriorOracle:

    """
    Mean-mode denoiser that knows the clean point: mu_t(z) = m_t(x0, z).
    """

    mode = "mean"

    def __init__(self, x0):
        self.x0 = np.asarray(x0, dtype=float)
        self.dim = self.x0.size
        self.standardizer = None

    def output(self, s, z, t):
        return posterior_mean(s, self.x0, z, t)

    def mean(self, s, z, t):
        return self.output(s, z, t)


class MeanView:

    """
    Presents a noise-mode net as the mean-mode net it implies.
    """

    mode = "mean"

    def __init__(self, net):
        self.net = net

    def output(self, s, z, t):
        return self.net.mean(s, z, t)


def _zero_net(dim, mode):
    return DenoiserNet(MlpParams([Dense(np.zeros((dim, 1 + dim + 2)))]), mode)


def _random_schedule(rng, T=None):
    T = T or int(rng.integers(2, 12))
    return DiffusionSchedule(rng.uniform(0.01, 0.5, size=T))


# -- make_schedule

def test_constant_schedule_alpha_is_a_power():
    s = make_schedule(20, 0.1)
    assert_allclose(s.alpha, 0.9 ** np.arange(21), rtol=1e-14)


def test_alpha_ratio_recovers_beta():
    s = make_schedule(100, (1e-4, 0.2))
    assert_allclose(s.alpha[1:] / s.alpha[:-1], 1 - s.beta[1:], atol=1e-14)


def test_linear_schedule_decays():
    assert make_schedule(100, (1e-4, 0.02)).alpha[-1] < 0.5


def test_backward_variances_agree():
    s = _random_schedule(np.random.default_rng(0), T=15)
    assert_allclose(s.beta_prime[2:], s.sigma2[2:], atol=1e-12)
    assert s.beta_prime[1] == s.beta[1] and s.sigma2[1] == 0.0


def test_invalid_schedules():
    with pytest.raises(InvalidScheduleError):
        make_schedule(10, 1.0)
    with pytest.raises(InvalidScheduleError):
        make_schedule(10, (0.0, 0.1))
    with pytest.raises(InvalidScheduleError):
        make_schedule(1, 0.1)


def test_schedule_record_roundtrip():
    s = make_schedule(7, (0.01, 0.3))
    assert np.array_equal(DiffusionSchedule.from_dict(s.to_dict()).beta, s.beta)


# -- forward process

def test_noiseless_limit_keeps_the_point():
    s = make_schedule(5, 1e-14)
    x = np.array([1.5, -0.5])
    z, _ = forward_marginal(s, x, 5, Rng(0))
    assert_allclose(z, x, atol=1e-5)


def test_forward_marginal_moments():
    s = make_schedule(50, (1e-4, 0.05))
    t = 30
    x = np.array([1.0, -2.0])
    z, _ = forward_marginal(s, np.tile(x, (400_000, 1)), t, Rng(1))
    assert_allclose(z.mean(axis=0), np.sqrt(s.alpha[t]) * x, rtol=0.01)
    assert_allclose(z.var(axis=0), 1 - s.alpha[t], rtol=0.01)


def test_composed_steps_match_marginal_parameters():
    s = _random_schedule(np.random.default_rng(2), T=10)
    coef, var = 1.0, 0.0
    for t in range(1, 11):
        coef *= np.sqrt(1 - s.beta[t])
        var = (1 - s.beta[t]) * var + s.beta[t]
        assert coef == pytest.approx(np.sqrt(s.alpha[t]), rel=1e-14)
        assert var == pytest.approx(1 - s.alpha[t], rel=1e-12)


def test_composed_steps_match_marginal_moments():
    s = make_schedule(8, (0.02, 0.15))
    x = np.array([2.0, -1.0])
    z = np.tile(x, (400_000, 1))
    rng = Rng(3)
    for t in range(1, 9):
        z = forward_step(s, z, t, rng)
    assert_allclose(z.mean(axis=0), np.sqrt(s.alpha[8]) * x, rtol=0.01)
    assert_allclose(z.var(axis=0), 1 - s.alpha[8], rtol=0.01)


# -- backward posterior

def test_tiny_step_is_invertible():
    s = DiffusionSchedule([0.3, 1e-13, 0.2])
    x, z = np.array([0.7]), np.array([-1.2])
    post = backward_posterior(s, x, z, 2)
    assert_allclose(post.mean, z, atol=1e-9)
    assert post.variance < 1e-12


def test_posterior_matches_gaussian_conditioning():
    rng = np.random.default_rng(4)
    for _ in range(200):
        s = _random_schedule(rng)
        t = int(rng.integers(2, s.T + 1))
        x, z = rng.normal(size=3), rng.normal(size=3)
        m1, m2 = np.sqrt(s.alpha[t - 1]) * x, np.sqrt(s.alpha[t]) * x
        v1, v2 = 1 - s.alpha[t - 1], 1 - s.alpha[t]
        cov = np.sqrt(1 - s.beta[t]) * v1
        post = backward_posterior(s, x, z, t)
        assert_allclose(post.mean, m1 + cov / v2 * (z - m2), atol=1e-10)
        assert post.variance == pytest.approx(v1 - cov ** 2 / v2, abs=1e-10)


def test_two_step_posterior_variance():
    s = DiffusionSchedule([0.5, 0.5])
    assert backward_posterior(s, np.zeros(1), np.zeros(1), 2).variance == pytest.approx(1 / 3, abs=1e-15)


def test_posterior_needs_t_at_least_two():
    with pytest.raises(InvalidArgumentError):
        backward_posterior(make_schedule(5, 0.1), np.zeros(2), np.zeros(2), 1)
    with pytest.raises(InvalidArgumentError):
        backward_posterior(make_schedule(5, 0.1), np.zeros(2), np.zeros(2), 6)


def test_first_step_mean_is_the_data():
    s = make_schedule(5, 0.1)
    assert_allclose(posterior_mean(s, np.array([3.0]), np.array([-7.0]), 1), [3.0], atol=1e-15)


def test_tweedie_bridge():
    rng = np.random.default_rng(5)
    for _ in range(100):
        s = _random_schedule(rng)
        t = int(rng.integers(1, s.T + 1))
        x, z = rng.normal(size=2), rng.normal(size=2)
        assert_allclose(tweedie_mean(s, x, z, t), posterior_mean(s, x, z, t), atol=1e-10)


def test_score_from_mean_recovers_standard_normal_score():
    # standard normal data stay standard normal: E[z_{t-1} | z_t] = sqrt(1 - beta_t) z_t, score -z_t
    s = make_schedule(10, (0.01, 0.2))
    z = np.random.default_rng(3).normal(size=(5, 2))
    for t in range(2, 11):
        mu = np.sqrt(1 - s.beta[t]) * z
        assert_allclose(score_from_mean(s, mu, z, t), -z, atol=1e-12)
        # dividing by sigma2_t instead of beta_t misses the score
        assert not np.allclose((mu - z) / s.posterior_variance(t), -z)


# -- diffusion_loss

def test_oracle_denoiser_has_zero_loss():
    s = make_schedule(10, (0.01, 0.2))
    x0 = np.array([0.5, -1.5])
    for t in range(1, 11):
        assert diffusion_loss(PosteriorOracle(x0), s, x0, t, Rng(t)) == pytest.approx(0.0, abs=1e-20)


def test_mean_and_noise_losses_agree_after_change_of_variables():
    s = make_schedule(10, (0.01, 0.2))
    net = DenoiserNet.random(Rng(6), 2, hidden=(8,), mode="noise")
    rng = np.random.default_rng(6)
    x = rng.normal(size=(20, 2))
    for t in range(1, 11):
        z, w = forward_marginal(s, x, t, Rng(t))
        noise_loss = denoising_loss(net, s, x, z, w, t)
        mean_loss = denoising_loss(MeanView(net), s, x, z, w, t)
        beta = s.beta[t]
        assert mean_loss == pytest.approx(beta ** 2 / ((1 - beta) * (1 - s.alpha[t])) * noise_loss, rel=1e-10)
        for variance in ("beta", "posterior"):
            weighted_noise = denoising_loss(net, s, x, z, w, t, weighted=True, variance=variance)
            weighted_mean = denoising_loss(MeanView(net), s, x, z, w, t, weighted=True, variance=variance)
            assert weighted_noise == pytest.approx(weighted_mean, rel=1e-10)


def test_noise_weight_at_first_step():
    s = make_schedule(5, 0.2)
    assert noise_weight(s, 1) == pytest.approx(1 / (2 * 0.8), rel=1e-12)
    assert noise_weight(s, 1, "posterior") == pytest.approx(noise_weight(s, 1), rel=1e-12)


def test_noise_weight_uses_beta_variance_at_every_step():
    s = make_schedule(10, (1e-4, 0.05))
    for t in range(1, 11):
        beta, alpha = s.beta[t], s.alpha[t]
        assert noise_weight(s, t) == pytest.approx(beta / (2 * (1 - alpha) * (1 - beta)), rel=1e-12)
        assert elbo_variance(s, t) == beta
    # t = 2: 0.49 instead of 28.4 under the posterior variance
    assert noise_weight(s, 2) == pytest.approx(0.494, abs=1e-3)
    assert noise_weight(s, 2, "posterior") > 20


def test_posterior_variance_weighting_matches_posterior_elbo_term():
    s = make_schedule(10, (1e-4, 0.05))
    for t in range(2, 11):
        beta = s.beta[t]
        expected = beta ** 2 / ((1 - beta) * (1 - s.alpha[t])) / (2 * s.posterior_variance(t))
        assert noise_weight(s, t, "posterior") == pytest.approx(expected, rel=1e-12)
    with pytest.raises(InvalidArgumentError):
        elbo_variance(s, 2, "sigma")


def test_zero_mean_net_loss_is_posterior_mean_energy():
    s = make_schedule(50, (1e-4, 0.05))
    t = 10
    x = np.random.default_rng(7).normal(size=(50_000, 2))
    loss = diffusion_loss(_zero_net(2, "mean"), s, x, t, Rng(7))
    cz, cx = posterior_coefficients(s, t)
    a = s.alpha[t]
    expected = 2 * ((cz * np.sqrt(a) + cx) ** 2 + cz ** 2 * (1 - a))
    assert loss == pytest.approx(expected, rel=0.02)


# -- training

def test_zero_learning_rate_gives_flat_eval_trace():
    X = np.random.default_rng(8).normal(size=(64, 2))
    s = make_schedule(10, (0.01, 0.2))
    cfg = ExperimentConfig(seed=8, learning_rate=0.0, max_steps=40, batch_size=16)
    net, trace = diffusion_train(X, s, cfg, hidden=(8,))
    assert list(trace.columns) == ["step", "t", "loss", "eval_loss"]
    assert len(trace) == 41
    evals = trace["eval_loss"].dropna().to_numpy()
    assert evals.size > 2 and np.all(evals == evals[0])
    assert trace["t"].iloc[1:].between(1, 10).all()


def test_training_is_deterministic_given_seed():
    X = np.random.default_rng(9).normal(size=(64, 2))
    s = make_schedule(10, (0.01, 0.2))
    cfg = ExperimentConfig(seed=9, learning_rate=0.01, max_steps=30, batch_size=16)
    net_a, trace_a = diffusion_train(X, s, cfg, hidden=(8,))
    net_b, trace_b = diffusion_train(X, s, cfg, hidden=(8,))
    assert np.array_equal(net_a.net.flatten(), net_b.net.flatten())
    assert trace_a.equals(trace_b)


def test_eval_loss_is_reproducible():
    s = make_schedule(10, (0.01, 0.2))
    net = DenoiserNet.random(Rng(10), 2, hidden=(4,))
    X = np.random.default_rng(10).normal(size=(30, 2))
    assert diffusion_eval_loss(net, s, X, seed=3) == diffusion_eval_loss(net, s, X, seed=3)


def test_standardizer_roundtrip():
    X = np.random.default_rng(11).normal(loc=5.0, scale=3.0, size=(100, 2))
    standardizer = Standardizer().fit(X)
    Z = standardizer.transform(X)
    assert_allclose(Z.mean(axis=0), 0.0, atol=1e-12)
    assert_allclose(Z.std(axis=0), 1.0, atol=1e-12)
    assert_allclose(standardizer.inverse_transform(Z), X, atol=1e-12)
    with pytest.raises(Warning):
        Standardizer().transform(X)


def test_denoiser_record_roundtrip():
    net = DenoiserNet.random(Rng(12), 2, hidden=(4,), standardizer=Standardizer().fit(np.eye(2)))
    restored = DenoiserNet.from_dict(net.to_dict())
    assert np.array_equal(restored.net.flatten(), net.net.flatten())
    assert_allclose(restored.standardizer.scale, net.standardizer.scale)


@pytest.mark.slow
def test_trained_net_learns_gaussian_backward_means():
    X = np.random.default_rng(13).normal(size=(2000, 2))
    s = make_schedule(50, (1e-4, 0.05))
    cfg = ExperimentConfig(seed=13, learning_rate=0.02, max_steps=5000, batch_size=128)
    net, _ = diffusion_train(X, s, cfg, hidden=(), mode="mean")
    grid = np.stack(np.meshgrid(np.linspace(-2, 2, 9), np.linspace(-2, 2, 9)), axis=-1).reshape(-1, 2)
    for t in (1, 10, 25, 50):
        assert np.max(np.abs(net.mean(s, grid, t) - np.sqrt(1 - s.beta[t]) * grid)) < 0.1


@pytest.mark.slow
def test_loss_decreases_on_mixture_data():
    truth = GmmParams([0.5, 0.5], [[-2.0, 0.0], [2.0, 0.0]], [0.1 * np.eye(2), 0.1 * np.eye(2)])
    X, _ = gmm_sample(truth, Rng(14), 1000)
    s = make_schedule(50, (1e-4, 0.05))
    cfg = ExperimentConfig(seed=14, learning_rate=0.02, max_steps=3000, batch_size=64)
    _, trace = diffusion_train(X, s, cfg, hidden=(32,))
    smoothed = trace["loss"].iloc[1:].rolling(100).mean().dropna().to_numpy()
    assert smoothed[-1] < smoothed[0]
    evals = trace["eval_loss"].dropna().to_numpy()
    assert evals[-1] < evals[0]


# -- sampling

def test_zero_noise_net_samples_follow_variance_recursion():
    s = make_schedule(10, 0.1)
    var = 1.0
    for t in range(10, 0, -1):
        var = var / (1 - s.beta[t]) + s.beta_prime[t]
    samples = diffusion_sample(_zero_net(1, "noise"), s, Rng(15), n=100_000)
    assert abs(samples.mean()) < 4 * np.sqrt(var / 100_000)
    assert samples.var() == pytest.approx(var, rel=0.02)


def test_oracle_sampling_concentrates_on_point_mass():
    s = DiffusionSchedule([0.01, 0.5])
    x0 = np.array([1.5])
    N = 10_000
    samples = diffusion_sample(PosteriorOracle(x0), s, Rng(16), n=N)
    assert abs(samples.mean() - 1.5) < 4 * np.sqrt(s.beta[1] / N)
    assert samples.std() == pytest.approx(np.sqrt(s.beta[1]), rel=0.05)


def test_sampling_is_deterministic():
    s = make_schedule(10, (0.01, 0.2))
    net = DenoiserNet.random(Rng(17), 2, hidden=(4,), standardizer=Standardizer().fit(np.eye(2) * 3))
    a = diffusion_sample(net, s, Rng(18))
    assert a.shape == (2,)
    assert np.array_equal(a, diffusion_sample(net, s, Rng(18)))


def test_linear_model_samples_match_propagated_moments():
    s = make_schedule(20, (0.01, 0.2))
    model = LinearDenoiser(np.full(20, 0.9), np.full(20, 0.1))
    samples = diffusion_sample(model, s, Rng(19), n=200_000)[:, 0]
    mean, var = 0.0, 1.0
    for t in range(20, 0, -1):
        mean, var = 0.9 * mean + 0.1, 0.81 * var + s.beta_prime[t]
    assert samples.mean() == pytest.approx(mean, abs=0.01)
    assert samples.var() == pytest.approx(var, rel=0.02)
    x = 0.3
    assert model_loglik(model, s, x) == pytest.approx(-0.5 * (np.log(2 * np.pi * var) + (x - mean) ** 2 / var), abs=1e-12)


# -- ELBO structure

def test_mean_matching_equals_score_matching():
    s = make_schedule(10, (0.01, 0.1))
    x = np.random.default_rng(20).normal(size=(4, 2))
    for seed in range(5):
        net = DenoiserNet.random(Rng(seed), 2, hidden=(8,))
        mean_loss, score_loss = score_matching_losses(net, s, x, Rng(99))
        assert abs(mean_loss - score_loss) < 1e-10 * max(1.0, mean_loss)


def test_score_gap_does_not_depend_on_the_net():
    s = make_schedule(10, (0.01, 0.1))
    x = np.random.default_rng(21).normal(size=(4, 2))
    gaps = [elbo_score_gap(DenoiserNet.random(Rng(seed), 2, hidden=(8,), mode=mode), s, x, Rng(7))
            for seed, mode in enumerate(["noise", "mean", "noise", "mean", "noise"])]
    losses = [score_matching_losses(DenoiserNet.random(Rng(seed), 2, hidden=(8,)), s, x, Rng(7))[0] for seed in range(5)]
    assert max(gaps) - min(gaps) < 1e-8 * max(1.0, max(losses))


def test_tractable_elbo_terms_match_direct_elbo():
    rng = np.random.default_rng(22)
    for _ in range(50):
        s = _random_schedule(rng)
        model = LinearDenoiser(rng.uniform(0.5, 1.2, size=s.T), rng.normal(scale=0.3, size=s.T))
        report = tractable_elbo_gap(model, s, rng.normal())
        assert report.elbo == pytest.approx(report.elbo_direct, abs=1e-8)
        assert report.gap >= -1e-10
        assert report.prior_kl >= 0 and np.all(report.step_kls >= 0)


def test_matched_linear_model_for_standard_normal_data():
    s = make_schedule(10, (0.05, 0.3))
    model = LinearDenoiser.matched(s)
    assert_allclose(model.a[1:], np.sqrt(1 - s.beta[1:]), rtol=1e-12)
    assert_allclose(model.b[1:], 0.0, atol=1e-15)
    shifted = LinearDenoiser.matched(s, mean=2.0, var=0.5)
    report = tractable_elbo_gap(shifted, s, 2.0)
    assert report.gap >= -1e-10 and report.elbo == pytest.approx(report.elbo_direct, abs=1e-8)
