import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import multivariate_normal

from genlearn.mixture.em import EmState, covariance_floor, em_fit, em_step, sample_covariance
from genlearn.mixture.gmm import (GmmParams, gmm_loglik, gmm_pdf, gmm_posterior, gmm_predict,
                                  gmm_responsibilities, gmm_sample)
from genlearn.numcore.rng import Rng
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import ComponentCollapseError, InvalidArgumentError, InvalidModelError


def _random_gmm(seed, d=3, M=2):
    rng = np.random.default_rng(seed)
    weights = rng.uniform(0.2, 1.0, size=d)
    means = rng.normal(scale=3.0, size=(d, M))
    covs = []
    for _ in range(d):
        A = rng.normal(size=(M, M))
        covs.append(A @ A.T + 0.5 * np.eye(M))
    return GmmParams(weights / weights.sum(), means, np.array(covs))


# -- densities and posteriors

def test_pdf_matches_direct_summation():
    for seed in range(10):
        g = _random_gmm(seed)
        x = np.random.default_rng(seed).normal(scale=2.0, size=2)
        expected = sum(g.weights[j] * multivariate_normal(g.means[j], g.covs[j]).pdf(x) for j in range(g.d))
        assert gmm_pdf(g, x) == pytest.approx(expected, rel=1e-12)


def test_single_component_posterior_is_certain():
    g = GmmParams([1.0], [[0.0, 1.0]], [np.eye(2)])
    assert_allclose(gmm_posterior(g, np.array([3.0, -2.0])).probs, [1.0])


def test_symmetric_components_split_evenly():
    g = GmmParams([0.5, 0.5], [[-1.0, 0.0], [1.0, 0.0]], [np.eye(2), np.eye(2)])
    assert_allclose(gmm_posterior(g, np.array([0.0, 4.0])).probs, [0.5, 0.5], atol=1e-15)


def test_non_positive_definite_covariance_is_rejected():
    with pytest.raises(InvalidModelError):
        GmmParams([0.5, 0.5], [[0.0, 0.0], [1.0, 1.0]], [np.eye(2), [[1.0, 2.0], [2.0, 1.0]]])


def test_weights_must_be_a_pmf():
    with pytest.raises(InvalidModelError):
        GmmParams([0.5, 0.6], [[0.0], [1.0]], [[[1.0]], [[1.0]]])


def test_responsibility_rows_are_pmfs():
    g = _random_gmm(1)
    X, _ = gmm_sample(g, Rng(1), 500)
    R = gmm_responsibilities(g, X)
    assert_allclose(R.sum(axis=1), 1.0, atol=1e-12)
    assert R.sum() == pytest.approx(500, abs=1e-9)


def test_loglik_is_sum_of_log_pdf():
    g = _random_gmm(2)
    X, _ = gmm_sample(g, Rng(2), 50)
    assert gmm_loglik(g, X) == pytest.approx(np.sum(np.log(gmm_pdf(g, X))), rel=1e-12)


def test_far_points_do_not_underflow():
    g = GmmParams([0.5, 0.5], [[0.0], [1.0]], [[[1e-2]], [[1e-2]]])
    probs = gmm_posterior(g, np.array([200.0])).probs
    assert_allclose(probs, [0.0, 1.0], atol=1e-12)


def test_sampled_labels_follow_weights_and_predict():
    g = GmmParams([0.2, 0.8], [[-20.0], [20.0]], [[[1.0]], [[1.0]]])
    X, labels = gmm_sample(g, Rng(3), 20_000)
    assert np.mean(labels == 1) == pytest.approx(0.8, abs=0.01)
    assert np.array_equal(gmm_predict(g, X), labels)


def test_params_record_roundtrip():
    g = _random_gmm(4)
    restored = GmmParams.from_dict(g.to_dict())
    assert restored.d == 3 and np.array_equal(restored.covs, g.covs)


# -- em_step

def test_single_component_step_gives_sample_statistics():
    X, _ = gmm_sample(_random_gmm(5), Rng(5), 300)
    start = GmmParams([1.0], [[10.0, -10.0]], [np.eye(2)])
    state = em_step(EmState.start(start, X), X)
    assert_allclose(state.params.means[0], X.mean(axis=0), atol=1e-12)
    expected = sample_covariance(X) + covariance_floor(X) * np.eye(2)
    assert_allclose(state.params.covs[0], expected, atol=1e-10)


def test_hard_assignments_give_per_cluster_statistics():
    rng = np.random.default_rng(6)
    A = rng.normal(size=(40, 2)) + [50.0, 0.0]
    B = 2.0 * rng.normal(size=(60, 2)) - [50.0, 0.0]
    X = np.vstack((A, B))
    start = GmmParams([0.5, 0.5], [[50.0, 0.0], [-50.0, 0.0]], [np.eye(2), np.eye(2)])
    state = em_step(EmState.start(start, X), X)
    floor = covariance_floor(X) * np.eye(2)
    assert_allclose(state.params.weights, [0.4, 0.6], atol=1e-12)
    assert_allclose(state.params.means, [A.mean(axis=0), B.mean(axis=0)], atol=1e-10)
    assert_allclose(state.params.covs[0], sample_covariance(A) + floor, atol=1e-10)
    assert_allclose(state.params.covs[1], sample_covariance(B) + floor, atol=1e-10)


def test_step_never_decreases_loglik():
    X, _ = gmm_sample(_random_gmm(7), Rng(7), 200)
    state = EmState.start(_random_gmm(8), X)
    for _ in range(30):
        new_state = em_step(state, X)
        assert new_state.loglik >= state.loglik - 1e-9
        assert_allclose(new_state.responsibilities.sum(axis=0).sum(), 200, atol=1e-9)
        state = new_state
    assert state.n_steps == 30


def test_empty_component_collapses():
    X = np.random.default_rng(9).normal(size=(100, 1))
    start = GmmParams([0.5, 0.5], [[0.0], [1e3]], [[[1.0]], [[1.0]]])
    with pytest.raises(ComponentCollapseError) as err:
        em_step(EmState.start(start, X), X)
    assert err.value.component == 1


# -- em_fit

def test_recovers_separated_gaussians():
    truth = GmmParams([0.5, 0.5], [[-5.0], [5.0]], [[[1.0]], [[1.0]]])
    X, _ = gmm_sample(truth, Rng(10), 400)
    state = em_fit(X, 2, ExperimentConfig(seed=11, max_steps=500))
    order = np.argsort(state.params.means[:, 0])
    assert_allclose(state.params.means[order, 0], [-5.0, 5.0], atol=0.2)
    assert_allclose(state.params.weights[order], [0.5, 0.5], atol=0.05)


def test_single_component_converges_after_one_update():
    X, _ = gmm_sample(_random_gmm(12), Rng(12), 100)
    state = em_fit(X, 1, ExperimentConfig(seed=12))
    assert state.n_steps == 2
    assert state.trace[2] == pytest.approx(state.trace[1], abs=1e-8)


def test_traces_are_non_decreasing_across_seeds():
    X, _ = gmm_sample(_random_gmm(13), Rng(13), 300)
    for seed in range(20):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            state = em_fit(X, 3, ExperimentConfig(seed=seed, max_steps=100))
        assert np.all(np.diff(state.trace) >= -1e-9)


def test_fit_is_deterministic_given_seed():
    X, _ = gmm_sample(_random_gmm(14), Rng(14), 200)
    a = em_fit(X, 3, ExperimentConfig(seed=3, max_steps=50))
    b = em_fit(X, 3, ExperimentConfig(seed=3, max_steps=50))
    assert np.array_equal(a.params.means, b.params.means)
    assert np.array_equal(a.trace, b.trace)


def test_fit_needs_enough_points():
    with pytest.raises(InvalidArgumentError):
        em_fit(np.zeros((8, 2)), 3, ExperimentConfig(seed=0))
