from typing import Tuple

import numpy as np
import scipy.linalg

from genlearn.utils.exceptions import InvalidArgumentError, InvalidModelError

SYMMETRY_TOL = 1e-10


def _check_symmetric(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError("The value of 'm' must be a square matrix.")
    if not np.all(np.isfinite(m)):
        raise InvalidArgumentError("The entries of 'm' must be finite.")
    if m.size and np.max(np.abs(m - m.T)) > SYMMETRY_TOL:
        raise InvalidArgumentError(f"The value of 'm' must be symmetric within {SYMMETRY_TOL}.")


def eigh_sym(m: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations. Returns the eigenvalues
    sorted in descending order and the matrix whose columns are the matching orthonormal
    eigenvectors.

    Parameters
    ----------
    m: np.ndarray
        A symmetric (within 1e-10) square matrix
    tol: float (default=1e-15)
        Relative size of the off-diagonal mass at which the sweeps stop
    max_sweeps: int (default=100)
        Upper bound on the number of full sweeps
    """
    a = np.array(m, dtype=float)
    _check_symmetric(a)
    a = (a + a.T) / 2
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # rotation angle that zeroes a[p, q]
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                sign = 1.0 if theta >= 0 else -1.0
                t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J, V <- V J
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p], a[:, q] = c * ap - s * aq, s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :], a[q, :] = c * ap - s * aq, s * ap + c * aq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p], v[:, q] = c * vp - s * vq, s * vp + c * vq
    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order]


def cholesky_lower(cov: np.ndarray) -> np.ndarray:
    """
    Returns the lower Cholesky factor of a covariance matrix. Raises InvalidModelError if the
    matrix is not positive definite.

    Parameters
    ----------
    cov: np.ndarray
        A symmetric positive-definite matrix
    """
    try:
        return scipy.linalg.cholesky(cov, lower=True)
    except (np.linalg.LinAlgError, ValueError) as err:
        raise InvalidModelError(f"Covariance matrix is not positive definite ({err}).") from err


def random_orthogonal(rng, n: int) -> np.ndarray:
    """
    Draws an n x n orthogonal matrix (QR decomposition of a Gaussian matrix with sign fix).

    Parameters
    ----------
    rng: Rng
        The random number generator
    n: int
        The size of the matrix
    """
    q, r = np.linalg.qr(rng.normal((n, n)))
    return q * np.sign(np.diag(r))
