import numpy as np
import pytest
from numpy.testing import assert_allclose

from genlearn.numcore.gradients import finite_diff_grad
from genlearn.numcore.linalg import cholesky_lower, eigh_sym, random_orthogonal
from genlearn.numcore.optimize import maximize_scalar
from genlearn.numcore.quadrature import quad_1d, quad_2d
from genlearn.numcore.rng import Rng, as_rng, sample_std_normal
from genlearn.utils.exceptions import InvalidArgumentError, InvalidModelError


# -- Rng

def test_same_seed_and_purpose_reproduce():
    a, b = Rng(5, "x"), Rng(5, "x")
    assert_allclose(a.uniform(10), b.uniform(10))
    assert_allclose(a.normal((3, 2)), b.normal((3, 2)))
    assert a.integers(100) == b.integers(100)


def test_purposes_are_independent_streams():
    assert not np.allclose(Rng(5, "x").uniform(10), Rng(5, "y").uniform(10))
    assert not np.allclose(Rng(5, "x").uniform(10), Rng(6, "x").uniform(10))


def test_new_streams_do_not_perturb_existing_ones():
    a, b = Rng(1, "main"), Rng(1, "main")
    a.uniform(3)
    b.uniform(3)
    a.substream("other").uniform(100)
    Rng(1, "third").normal(50)
    assert_allclose(a.uniform(5), b.uniform(5))


def test_substream_is_keyed_by_parent_purpose():
    assert_allclose(Rng(2, "a").substream("b").uniform(4), Rng(2, "a/b").uniform(4))


@pytest.mark.parametrize("seed", [-1, 2 ** 64, 1.5])
def test_seed_range(seed):
    with pytest.raises(InvalidArgumentError):
        Rng(seed)


def test_normal_moments_and_shapes():
    z = Rng(3, "normal").normal(200_000)
    assert abs(z.mean()) < 0.01
    assert abs(z.var() - 1) < 0.015
    assert Rng(3).normal(7).shape == (7,)
    assert Rng(3).normal((2, 3)).shape == (2, 3)
    assert Rng(3).normal(0).shape == (0,)


def test_categorical_frequencies():
    rng = Rng(4, "categorical")
    probs = np.array([0.2, 0.0, 0.5, 0.3])
    counts = np.bincount([rng.categorical(probs) for _ in range(20_000)], minlength=4) / 20_000
    assert counts[1] == 0
    assert_allclose(counts, probs, atol=0.015)


def test_as_rng_and_std_normal():
    rng = Rng(9)
    assert as_rng(rng) is rng
    assert_allclose(as_rng(9).uniform(3), Rng(9).uniform(3))
    assert sample_std_normal(Rng(1), 4).shape == (4,)
    with pytest.raises(InvalidArgumentError):
        sample_std_normal(Rng(1), 0)


# -- linear algebra

def test_jacobi_eigendecomposition_matches_lapack():
    rng = Rng(7, "eigh")
    for n in (1, 2, 5, 8):
        a = rng.normal((n, n))
        m = a + a.T
        values, vectors = eigh_sym(m)
        assert_allclose(values, np.sort(np.linalg.eigvalsh(m))[::-1], atol=1e-10)
        assert np.all(np.diff(values) <= 0)
        assert_allclose(vectors.T @ vectors, np.eye(n), atol=1e-10)
        assert_allclose(vectors @ np.diag(values) @ vectors.T, m, atol=1e-10)


def test_eigh_handles_diagonal_and_repeated_eigenvalues():
    values, vectors = eigh_sym(np.diag([1.0, 3.0, 3.0]))
    assert_allclose(values, [3.0, 3.0, 1.0])
    assert_allclose(np.abs(np.linalg.det(vectors)), 1.0)


@pytest.mark.parametrize("m", [np.ones((2, 3)), np.array([[1.0, 2.0], [0.0, 1.0]]), np.array([[np.inf]])])
def test_eigh_rejects_invalid_matrices(m):
    with pytest.raises(InvalidArgumentError):
        eigh_sym(m)


def test_cholesky():
    cov = np.array([[4.0, 2.0], [2.0, 3.0]])
    L = cholesky_lower(cov)
    assert_allclose(L @ L.T, cov)
    assert L[0, 1] == 0.0
    with pytest.raises(InvalidModelError):
        cholesky_lower(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_random_orthogonal():
    q = random_orthogonal(Rng(2, "orth"), 4)
    assert_allclose(q.T @ q, np.eye(4), atol=1e-12)


# -- quadrature / gradients / scalar search

def test_simpson_is_exact_on_cubics():
    assert quad_1d(lambda x: x ** 3 - 2 * x + 1, -1.0, 2.0, n=16) == pytest.approx(3.75, abs=1e-12)


def test_gaussian_integrates_to_one():
    assert quad_1d(lambda x: np.exp(-x ** 2 / 2) / np.sqrt(2 * np.pi), -8, 8) == pytest.approx(1.0, abs=1e-12)


def test_odd_interval_counts_are_rounded_up():
    assert quad_1d(lambda x: x ** 2, 0.0, 1.0, n=17) == pytest.approx(1 / 3, abs=1e-14)


def test_quadrature_checks():
    with pytest.raises(InvalidArgumentError):
        quad_1d(np.sin, 1.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        quad_1d(np.sin, 0.0, 1.0, n=8)


def test_double_integral_of_a_product_gaussian():
    def density(x0, x1):
        return np.exp(-(x0 ** 2 + (x1 - 1) ** 2 / 4) / 2) / (2 * np.pi * 2)

    assert quad_2d(density, np.array([-8.0, -15.0]), np.array([8.0, 17.0])) == pytest.approx(1.0, abs=1e-8)
    assert quad_2d(lambda x0, x1: x0 * x1, np.zeros(2), np.ones(2), n=16) == pytest.approx(0.25, abs=1e-14)


def test_finite_differences_of_a_quadratic():
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    x = np.array([0.5, -1.5])
    assert_allclose(finite_diff_grad(lambda v: 0.5 * v @ A @ v, x), A @ x, atol=1e-8)
    with pytest.raises(InvalidArgumentError):
        finite_diff_grad(np.sum, x, h=0.0)


def test_maximize_scalar_interior_and_endpoint():
    d, value = maximize_scalar(lambda t: -(t - 0.3) ** 2, 0.0, 1.0)
    assert d == pytest.approx(0.3, abs=1e-8)
    assert value == pytest.approx(0.0, abs=1e-14)
    d, value = maximize_scalar(lambda t: t, -1.0, 2.0)
    assert (d, value) == (2.0, 2.0)
    with pytest.raises(InvalidArgumentError):
        maximize_scalar(lambda t: t, 1.0, 1.0)
