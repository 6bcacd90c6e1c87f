import numpy as np
import pytest

from genlearn.divergence.f_divergence import NAMED, FDivSpec, f_divergence, hockey_stick, named_spec, renyi_gen
from genlearn.divergence.game import GameSpec, game_value
from genlearn.divergence.measures import (cross_entropy, data_processed, entropy, hellinger, joint_with_channel,
                                          js_divergence, relative_entropy, renyi_divergence, total_variation)
from genlearn.divergence.pmf import Channel, Pmf
from genlearn.numcore.rng import Rng
from genlearn.utils.exceptions import InvalidArgumentError, InvalidSpecError

P = Pmf([0.5, 0.5])
Q = Pmf([0.25, 0.75])


def _pairs(purpose, count, size=5, sparsity=0.0):
    rng = Rng(11, purpose)
    return [(Pmf.random(rng, size, sparsity), Pmf.random(rng, size, sparsity)) for _ in range(count)]


# -- Pmf / Channel

@pytest.mark.parametrize("probs", [[], [0.5, 0.6], [-0.1, 1.1], [np.nan, 1.0]])
def test_pmf_rejects_invalid_vectors(probs):
    with pytest.raises(InvalidArgumentError):
        Pmf(probs)


def test_pmf_is_read_only():
    with pytest.raises(ValueError):
        P.probs[0] = 1.0


def test_random_sparse_pmf_keeps_one_entry():
    rng = Rng(0, "sparse")
    for _ in range(50):
        p = Pmf.random(rng, 4, sparsity=0.99)
        assert np.count_nonzero(p.probs) >= 1
        assert p.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_channel_rows_must_be_pmfs():
    with pytest.raises(InvalidArgumentError):
        Channel([[0.5, 0.5], [0.7, 0.7]])


# -- named generators

def test_kl_example():
    assert f_divergence(P, Q, named_spec("kl")) == pytest.approx(0.207518, abs=1e-6)


def test_chi_square_example():
    assert f_divergence(P, Q, named_spec("chi_sq")) == pytest.approx(1 / 3, abs=1e-12)


def test_tv_of_disjoint_supports():
    assert f_divergence(Pmf([1, 0]), Pmf([0, 1]), named_spec("tv")) == 1.0


@pytest.mark.parametrize("name, expected", [("kl", np.inf), ("reverse_kl", np.inf), ("chi_sq", np.inf),
                                            ("js", 2.0), ("hellinger_sq", 1.0)])
def test_boundary_conventions_on_disjoint_supports(name, expected):
    assert f_divergence(Pmf([1, 0]), Pmf([0, 1]), named_spec(name)) == expected


@pytest.mark.parametrize("name", sorted(NAMED))
def test_divergence_of_pmf_with_itself_is_zero(name):
    for p, _ in _pairs("self", 20, sparsity=0.3):
        assert f_divergence(p, p, named_spec(name)) == pytest.approx(0.0, abs=1e-12)


def test_named_generators_match_direct_formulas():
    for p, q in _pairs("direct", 50):
        assert f_divergence(p, q, named_spec("kl")) == pytest.approx(relative_entropy(p, q), abs=1e-12)
        assert f_divergence(p, q, named_spec("reverse_kl")) == pytest.approx(relative_entropy(q, p), abs=1e-12)
        assert f_divergence(p, q, named_spec("tv")) == pytest.approx(total_variation(p, q), abs=1e-12)
        assert f_divergence(p, q, named_spec("js")) == pytest.approx(js_divergence(p, q), abs=1e-12)
        assert f_divergence(p, q, named_spec("hellinger_sq")) == pytest.approx(hellinger(p, q) ** 2, abs=1e-12)


def test_hockey_stick_at_one_is_total_variation():
    for p, q in _pairs("hockey", 100, sparsity=0.2):
        assert f_divergence(p, q, hockey_stick(1.0)) == pytest.approx(total_variation(p, q), abs=1e-12)


def test_hockey_stick_decreases_with_gamma():
    for p, q in _pairs("hockey/gamma", 20):
        values = [f_divergence(p, q, hockey_stick(g)) for g in (1.0, 1.5, 2.0, 4.0)]
        assert np.all(np.diff(values) <= 1e-15)


def test_non_negativity_and_data_processing():
    rng = Rng(3, "dpi")
    specs = [named_spec(name) for name in sorted(NAMED)] + [hockey_stick(1.5), renyi_gen(0.5), renyi_gen(2.0)]
    for _ in range(1000):
        p, q = Pmf.random(rng, 5, sparsity=0.2), Pmf.random(rng, 5, sparsity=0.2)
        ch = Channel.random(rng, 5, 3)
        p_out, q_out = data_processed(p, q, ch)
        for spec in specs:
            before = f_divergence(p, q, spec)
            after = f_divergence(p_out, q_out, spec)
            assert before >= -1e-10
            assert after <= before + 1e-10


def test_identity_and_constant_channels():
    for p, q in _pairs("channels", 10):
        spec = named_spec("kl")
        p_id, q_id = data_processed(p, q, Channel.identity(5))
        assert f_divergence(p_id, q_id, spec) == pytest.approx(f_divergence(p, q, spec), abs=1e-12)
        p_c, q_c = data_processed(p, q, Channel.constant(5, Pmf.uniform(3)))
        assert f_divergence(p_c, q_c, spec) == pytest.approx(0.0, abs=1e-12)


def test_shared_channel_leaves_joint_kl_unchanged():
    rng = Rng(5, "joint")
    for p, q in _pairs("joint", 20):
        ch = Channel.random(rng, 5, 4)
        joint = relative_entropy(joint_with_channel(p, ch), joint_with_channel(q, ch))
        assert joint == pytest.approx(relative_entropy(p, q), abs=1e-12)


def test_alphabet_mismatch():
    with pytest.raises(InvalidArgumentError):
        f_divergence(P, Pmf([0.2, 0.3, 0.5]), named_spec("kl"))
    with pytest.raises(InvalidArgumentError):
        data_processed(P, Q, Channel.identity(3))


def test_invalid_generators_are_rejected():
    concave = FDivSpec("concave", lambda t: -(t - 1) ** 2, -1.0, -np.inf)
    shifted = FDivSpec("shifted", lambda t: t, 0.0, 1.0)
    for spec in (concave, shifted):
        with pytest.raises(InvalidSpecError):
            f_divergence(P, Q, spec)


def test_parameter_checks():
    with pytest.raises(InvalidSpecError):
        hockey_stick(0.5)
    with pytest.raises(InvalidArgumentError):
        renyi_gen(1.0)
    with pytest.raises(InvalidArgumentError):
        named_spec("renyi_gen")
    with pytest.raises(InvalidArgumentError):
        named_spec("bhattacharyya")


# -- derived measures

def test_entropy_and_cross_entropy():
    assert entropy(Pmf.uniform(8)) == pytest.approx(3.0, abs=1e-12)
    assert entropy(Pmf([1.0, 0.0])) == 0.0
    for p, q in _pairs("cross", 20):
        assert cross_entropy(p, q) == pytest.approx(entropy(p) + relative_entropy(p, q), abs=1e-12)
    assert cross_entropy(Pmf([0.5, 0.5]), Pmf([1.0, 0.0])) == np.inf


def test_sqrt_js_triangle_inequality():
    rng = Rng(7, "triangle")
    for _ in range(1000):
        p, q, r = (Pmf.random(rng, 4, sparsity=0.2) for _ in range(3))
        lhs = np.sqrt(js_divergence(p, r))
        assert lhs <= np.sqrt(js_divergence(p, q)) + np.sqrt(js_divergence(q, r)) + 1e-10


def test_hellinger_sandwich_and_kl_bound():
    for p, q in _pairs("hellinger", 1000, size=4, sparsity=0.2):
        h = hellinger(p, q)
        tv_value = total_variation(p, q)
        assert h ** 2 <= tv_value + 1e-10
        assert tv_value <= np.sqrt(2) * h + 1e-10
        if h < 1:
            assert relative_entropy(p, q) >= -2 * np.log2(1 - h ** 2) - 1e-10


@pytest.mark.parametrize("alpha", [0.5, 2.0, 5.0])
def test_renyi_from_its_generator(alpha):
    for p, q in _pairs(f"renyi/{alpha}", 50):
        direct = np.log2(np.sum(p.probs ** alpha * q.probs ** (1 - alpha))) / (alpha - 1)
        assert renyi_divergence(p, q, alpha) == pytest.approx(direct, rel=1e-10, abs=1e-12)


def test_renyi_tends_to_kl():
    assert renyi_divergence(P, Q, 1 + 1e-4) == pytest.approx(relative_entropy(P, Q), abs=1e-3)


def test_renyi_below_one_on_disjoint_supports():
    assert renyi_divergence(Pmf([1, 0]), Pmf([0, 1]), 0.5) == np.inf


# -- separable games

def test_log_game_value_is_js_minus_two():
    for p, q in _pairs("game/log", 200, sparsity=0.2):
        value, d_star = game_value(p, q, GameSpec("gan_log"))
        assert value == pytest.approx(js_divergence(p, q) - 2, abs=1e-10)
        both = (p.probs + q.probs) > 0
        np.testing.assert_allclose(d_star[both], p.probs[both] / (p.probs[both] + q.probs[both]))
        assert np.all(d_star[~both] == 0.5)


@pytest.mark.parametrize("tag", ["gan_log", "fgan_a"])
def test_search_never_beats_closed_form(tag):
    game = GameSpec(tag)
    for p, q in _pairs(f"game/search/{tag}", 30):
        closed, _ = game_value(p, q, game)
        searched, _ = game_value(p, q, game, method="search")
        assert searched <= closed + 1e-6
        assert searched >= closed - 1e-6


def test_variational_games_recover_divergences():
    for p, q in _pairs("game/f", 50):
        assert game_value(p, q, GameSpec("fgan_a"))[0] == pytest.approx(total_variation(p, q), abs=1e-12)
        assert game_value(p, q, GameSpec("fgan_b"))[0] == pytest.approx(f_divergence(p, q, named_spec("chi_sq")),
                                                                         rel=1e-10)
        assert game_value(p, q, GameSpec("fgan_c"))[0] == pytest.approx(2 * hellinger(p, q) ** 2, abs=1e-12)


def test_game_checks():
    with pytest.raises(InvalidArgumentError):
        GameSpec("wasserstein")
    with pytest.raises(InvalidArgumentError):
        GameSpec("fgan_a", gamma=0.0)
    with pytest.raises(InvalidArgumentError):
        game_value(P, Q, GameSpec("gan_log"), method="grid")
