"""Dense symmetric-matrix numerics underlying the estimators.

Cholesky factorization with an explicit positive-definiteness contract,
log-determinants, SPD inverses, zero-mean Gaussian sampling, sample
covariances, and the Gaussian log-likelihood. Everything operates on plain
float64 numpy arrays. Symmetric results are symmetrized explicitly so that
downstream code can rely on exact (bitwise) symmetry.
"""

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefiniteError

# Pivots at or below this fraction of the largest diagonal entry are treated
# as evidence of a singular or indefinite matrix rather than round-off.
PIVOT_RTOL = 1e-12


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return ``(A + A.T) / 2``, forcing exact symmetry."""
    return (a + a.T) / 2.0


def check_symmetric(a, name: str = "matrix") -> np.ndarray:
    """Validate that `a` is a square, exactly symmetric 2-d float array."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError(f"{name} must have dimension >= 1")
    if not np.array_equal(a, a.T):
        raise ValueError(f"{name} is not symmetric")
    return a


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor L with ``L @ L.T == a``.

    Parameters
    ----------
    a : ndarray, shape (p, p)
        Symmetric positive definite matrix.

    Returns
    -------
    L : ndarray, shape (p, p)
        Lower-triangular factor with strictly positive diagonal.

    Raises
    ------
    NotPositiveDefiniteError
        If a pivot at or below ``PIVOT_RTOL`` times the largest diagonal
        entry of `a` is encountered, signalling singular or indefinite input.
    """
    a = check_symmetric(a)
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            f"matrix of dimension {a.shape[0]} is not positive definite"
        ) from exc
    # LAPACK only rejects pivots <= 0; enforce the relative pivot floor too.
    pivots = np.diag(lower) ** 2
    if np.min(pivots) <= PIVOT_RTOL * np.max(np.diag(a)):
        raise NotPositiveDefiniteError(
            f"pivot {np.min(pivots):.3e} below tolerance; matrix is "
            "numerically singular"
        )
    return lower


def log_det(lower: np.ndarray) -> float:
    """Log-determinant of the matrix whose Cholesky factor is `lower`."""
    return 2.0 * float(np.sum(np.log(np.diag(lower))))


def inverse_spd(lower: np.ndarray) -> np.ndarray:
    """Inverse of the SPD matrix whose Cholesky factor is `lower`.

    Uses two triangular solves; the result is symmetrized so the output is
    exactly symmetric.
    """
    p = lower.shape[0]
    inv = scipy.linalg.cho_solve((lower, True), np.eye(p))
    return symmetrize(inv)


def sample_mvn(chol_sigma: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `n` zero-mean Gaussian vectors with covariance ``L @ L.T``.

    Each row is ``L @ z`` for a vector ``z`` of independent standard normal
    deviates; the draw is deterministic for a fixed generator state.
    """
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    z = rng.standard_normal((n, chol_sigma.shape[0]))
    return z @ chol_sigma.T


def sample_covariance(x: np.ndarray) -> np.ndarray:
    """Second-moment matrix ``sum_i x_i x_i^T / n`` of a zero-mean sample.

    No mean-centering is applied: the mean is assumed known to be zero.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"data must be 2-d, got shape {x.shape}")
    n = x.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 rows, got {n}")
    return symmetrize(x.T @ x / n)


def gaussian_loglik(s: np.ndarray, omega: np.ndarray) -> float:
    """Per-observation Gaussian log-likelihood ``log|Omega| - Tr(S Omega)``.

    Raises
    ------
    NotPositiveDefiniteError
        If `omega` is not positive definite.
    """
    lower = cholesky(omega)
    return log_det(lower) - float(np.sum(s * omega))


def spawn_rngs(root_seed, count: int) -> list:
    """Independent generators, one per index, deterministic in the root seed.

    Sub-streams depend only on (root_seed, index), so consumers may run in
    any order without affecting results.
    """
    ss = np.random.SeedSequence(root_seed)
    return [np.random.default_rng(child) for child in ss.spawn(count)]
