import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from genlearn.autoregressive.evaluation import (dataset_loglik, entropy_rate, markov_chain_sequences, perplexity,
                                                sample_ancestral, sequence_loglik, stationary_distribution)
from genlearn.autoregressive.markov import MarkovModel, fit_markov, uniform_markov
from genlearn.autoregressive.neural_ar import NeuralArModel, fit_neural_ar
from genlearn.data.dataset import SequenceDataset
from genlearn.numcore.rng import Rng
from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import ContextTooLargeError

CHAIN = np.array([[0.9, 0.1], [0.3, 0.7]])


def _random_sequences(seed, n=20, K=12, V=3):
    return SequenceDataset(np.random.default_rng(seed).integers(0, V, size=(n, K)), V)


# -- fit_markov

def test_alternating_sequence_order_one():
    model = fit_markov(SequenceDataset([[0, 1, 0, 1, 0, 1]], 2), order=1, alpha=0.0)
    assert model.conditional([0])[1] == 1.0
    assert model.conditional([1])[0] == 1.0
    assert model.conditional([2])[0] == 1.0


def test_large_alpha_is_uniform():
    model = fit_markov(_random_sequences(0), order=2, alpha=1e9)
    assert_allclose(model.tables, 1 / 3, atol=1e-6)


def test_order_zero_gives_marginal_frequencies():
    ds = _random_sequences(1)
    model = fit_markov(ds, order=0, alpha=0.0)
    freqs = np.bincount(ds.sequences.ravel(), minlength=3) / ds.sequences.size
    assert_allclose(model.tables[0], freqs, atol=1e-15)


def test_order_above_four_is_rejected():
    with pytest.raises(ContextTooLargeError):
        fit_markov(_random_sequences(2), order=5)


def test_table_rows_are_pmfs():
    for order in range(4):
        model = fit_markov(_random_sequences(3, V=4), order=order, alpha=0.5)
        assert_allclose(model.tables.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(model.tables >= 0)


def test_unseen_context_warns_without_smoothing():
    ds = SequenceDataset([[0, 0, 0, 0]], 3)
    with pytest.warns(Warning):
        model = fit_markov(ds, order=1, alpha=0.0)
    assert_allclose(model.conditional([1]), 1 / 3)


def test_impossible_contexts_do_not_warn():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fit_markov(SequenceDataset([[0, 1, 1, 0], [1, 0, 0, 1], [0, 0, 1, 1], [1, 1, 0, 0]], 2), order=2, alpha=0.0)


def test_model_record_roundtrip():
    model = fit_markov(_random_sequences(4), order=2)
    restored = MarkovModel.from_dict(model.to_dict())
    assert np.array_equal(restored.tables, model.tables)
    assert restored.order == 2 and restored.V == 3


# -- sequence_loglik / perplexity

def test_deterministic_cycle_has_zero_loglik():
    ds = SequenceDataset([[0, 1, 0, 1, 0, 1]], 2)
    model = fit_markov(ds, order=1, alpha=0.0)
    assert sequence_loglik(model, ds.sequences[0]) == 0.0
    assert perplexity(model, ds) == 1.0


def test_uniform_model():
    ds = _random_sequences(5, K=9, V=5)
    model = uniform_markov(5)
    assert sequence_loglik(model, ds.sequences[0]) == pytest.approx(-9 * np.log2(5), rel=1e-12)
    assert perplexity(model, ds) == pytest.approx(5.0, rel=1e-12)


def test_loglik_matches_brute_force_lookups():
    ds = _random_sequences(6)
    model = fit_markov(ds, order=1)
    seq = ds.sequences[0]
    expected = np.log2(model.tables[3, seq[0]])
    for prev, cur in zip(seq[:-1], seq[1:]):
        expected += np.log2(model.tables[prev, cur])
    assert sequence_loglik(model, seq) == pytest.approx(expected, abs=1e-12)


def test_zero_conditional_gives_infinite_perplexity():
    model = fit_markov(SequenceDataset([[0, 1, 0, 1]], 2), order=1, alpha=0.0)
    seq = np.array([0, 0, 1])
    assert sequence_loglik(model, seq) == -np.inf
    assert perplexity(model, SequenceDataset([seq], 2)) == np.inf


def test_perplexity_matches_cross_entropy_rate():
    train = _random_sequences(7)
    test = _random_sequences(8)
    model = fit_markov(train, order=2, alpha=0.7)
    total, count = 0.0, 0
    for seq in test:
        for k in range(1, len(seq)):
            context = [3] * max(0, 2 - k) + list(seq[max(0, k - 2):k])
            total -= np.log2(model.conditional(context)[seq[k]])
            count += 1
    assert perplexity(model, test) == pytest.approx(2 ** (total / count), rel=1e-12)


def test_perplexity_counts_first_symbol_on_request():
    ds = _random_sequences(9)
    model = fit_markov(ds, order=1)
    logs = sum(sequence_loglik(model, seq) for seq in ds)
    assert perplexity(model, ds, include_first=True) == pytest.approx(2 ** (-logs / ds.sequences.size), rel=1e-12)


def test_smoothed_perplexity_on_training_set_is_bounded():
    for seed in range(10):
        ds = _random_sequences(seed, V=4)
        for order in range(3):
            value = perplexity(fit_markov(ds, order=order, alpha=1.0), ds)
            assert 1.0 <= value <= 4 + 1e-9


def test_dataset_loglik_is_sum_of_sequences():
    ds = _random_sequences(10)
    model = fit_markov(ds, order=1)
    parts = [sequence_loglik(model, seq) for seq in ds]
    assert dataset_loglik(model, ds) == pytest.approx(sum(parts), abs=1e-10)


# -- sampling

def test_deterministic_sampling_ignores_seed():
    model = fit_markov(SequenceDataset([[0, 1, 0, 1, 0, 1]], 2), order=1, alpha=0.0)
    for seed in range(5):
        assert np.array_equal(sample_ancestral(model, Rng(seed), 7), [0, 1, 0, 1, 0, 1, 0])


def test_uniform_sampling_frequencies():
    sample = sample_ancestral(uniform_markov(4), Rng(11), 100_000)
    assert_allclose(np.bincount(sample, minlength=4) / sample.size, 0.25, atol=0.01)


def test_sampled_transitions_match_tables():
    model = fit_markov(markov_chain_sequences(Rng(12), CHAIN, 50, 40), order=1)
    sample = sample_ancestral(model, Rng(13), 100_001)
    counts = np.zeros((2, 2))
    np.add.at(counts, (sample[:-1], sample[1:]), 1)
    assert_allclose(counts / counts.sum(axis=1, keepdims=True), model.tables[:2], atol=0.01)


def test_sampling_is_deterministic_given_rng():
    model = fit_markov(_random_sequences(14), order=2)
    assert np.array_equal(sample_ancestral(model, Rng(3), 50), sample_ancestral(model, Rng(3), 50))


# -- chains

def test_entropy_rate_of_chain():
    pi = stationary_distribution(CHAIN)
    assert_allclose(pi, [0.75, 0.25], atol=1e-12)
    h = lambda p: -p * np.log2(p) - (1 - p) * np.log2(1 - p)
    assert entropy_rate(CHAIN) == pytest.approx(0.75 * h(0.1) + 0.25 * h(0.3), rel=1e-12)


# -- neural autoregressive model

def test_untrained_neural_model_is_uniform():
    model = NeuralArModel.init(Rng(15), V=4, c=2, hidden=(5,))
    assert perplexity(model, _random_sequences(16, V=4)) == pytest.approx(4.0, rel=1e-12)


def test_neural_model_next_probs_match_conditionals():
    model = NeuralArModel.init(Rng(17), V=3, c=2, hidden=(4,))
    model = NeuralArModel(model.net.with_flat(np.random.default_rng(17).normal(size=model.net.flatten().size)), 3, 2)
    seq = [2, 0, 1, 1, 0]
    probs = model.conditional_probs(seq)
    for k in range(len(seq)):
        assert_allclose(model.next_probs(seq[:k]), probs[k], atol=1e-12)


def test_neural_model_record_roundtrip():
    model = NeuralArModel.init(Rng(18), V=3, c=1)
    restored = NeuralArModel.from_dict(model.to_dict())
    assert restored.c == 1 and np.array_equal(restored.net.flatten(), model.net.flatten())


def test_neural_ar_learns_order_one_chain():
    train = markov_chain_sequences(Rng(19), CHAIN, 200, 50)
    test = markov_chain_sequences(Rng(20), CHAIN, 200, 50)
    cfg = ExperimentConfig(seed=21, learning_rate=0.5, epochs=10, batch_size=100)
    model, trace = fit_neural_ar(train, 1, cfg)
    assert trace[-1] < trace[0]
    assert perplexity(model, test) == pytest.approx(2 ** entropy_rate(CHAIN), rel=0.05)


def test_neural_ar_without_context_is_marginal():
    marginal = np.array([0.6, 0.3, 0.1])
    ds = markov_chain_sequences(Rng(22), np.tile(marginal, (3, 1)), 100, 30)
    cfg = ExperimentConfig(seed=23, learning_rate=0.5, epochs=10, batch_size=100)
    model, _ = fit_neural_ar(ds, 0, cfg)
    assert perplexity(model, ds) == pytest.approx(perplexity(fit_markov(ds, order=0), ds), rel=0.02)
