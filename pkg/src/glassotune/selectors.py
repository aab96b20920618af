"""Tuning-parameter selection for the penalized precision estimators.

Five selectors score a lambda grid: exact leave-one-out cross-validation,
K-fold cross-validation, a closed-form first-order approximation to
leave-one-out (GACV, computed from a single full-data fit per lambda), and
the BIC and AIC information criteria. Cross-validated log-likelihoods are
maximized; information criteria are minimized. Ties are broken toward the
larger lambda, i.e. the sparser model.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateInputError, FoldTooSmallError, GlassoTuneError
from .linalg import gaussian_loglik, sample_covariance, symmetrize
from .penalties import PenaltyConfig, fit_path, fit_with_penalty
from .solver import PrecisionEstimate, SolverOptions

LOOCV = "loocv"
KCV = "kcv"
GACV = "gacv"
BIC = "bic"
AIC = "aic"
SELECTOR_KINDS = (LOOCV, KCV, GACV, BIC, AIC)

# Score direction per selector: cross-validated likelihoods are maximized,
# information criteria minimized.
DIRECTION = {LOOCV: "max", KCV: "max", GACV: "max", BIC: "min", AIC: "min"}


@dataclass(frozen=True)
class SelectorScores:
    """Per-lambda scores for one selector, aligned with a lambda grid."""

    selector: str
    scores: np.ndarray
    direction: str


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of scoring a lambda grid and refitting at the winner."""

    grid: np.ndarray
    scores: SelectorScores
    chosen_lambda: float
    estimate: PrecisionEstimate


def count_support(est: PrecisionEstimate) -> int:
    """Number of nonzero entries on and above the diagonal."""
    return len(est.support)


def bic_score(s, est, n: int) -> float:
    """``-log|Omega| + Tr(S Omega) + k log(n)/n`` with k = upper support size."""
    k = count_support(est)
    return -gaussian_loglik(s, est.precision) + k * math.log(n) / n


def aic_score(s, est, n: int) -> float:
    """``-log|Omega| + Tr(S Omega) + 2k/n`` with k = upper support size."""
    k = count_support(est)
    return -gaussian_loglik(s, est.precision) + 2.0 * k / n


def lambda_grid(s, count: int = 50, ratio: float = 0.01) -> np.ndarray:
    """Log-spaced lambda grid from lambda_max down to ``lambda_max * ratio``.

    ``lambda_max`` is the largest absolute off-diagonal entry of `s`: the
    smallest uniform lasso weight that saturates every off-diagonal entry to
    zero. Values are strictly decreasing.

    Raises
    ------
    DegenerateInputError
        If every off-diagonal entry of `s` is zero.
    """
    if count < 2:
        raise ValueError("count must be at least 2")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    p = s.shape[0]
    off = np.abs(s[~np.eye(p, dtype=bool)]) if p > 1 else np.zeros(0)
    lam_max = float(np.max(off)) if off.size else 0.0
    if lam_max == 0.0:
        raise DegenerateInputError(
            "all off-diagonal covariances are zero; lambda grid undefined"
        )
    return np.geomspace(lam_max, lam_max * ratio, count)


def _fold_indices(n: int, k: int, rng=None):
    """Partition row indices into `k` folds with sizes differing by <= 1.

    A seeded generator permutes the rows first; with ``k == n`` the
    partition is unique (one row per fold, in row order), so no permutation
    is applied and leave-one-out reduces to the same code path.
    """
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if k > n:
        raise FoldTooSmallError(f"cannot split {n} rows into {k} nonempty folds")
    if k == n or rng is None:
        perm = np.arange(n)
    else:
        perm = rng.permutation(n)
    return np.array_split(perm, k)


def _heldout_loglik(x_test, est) -> float:
    """``n_k (log|Omega| - Tr(S_k Omega))`` for one held-out block."""
    n_k = x_test.shape[0]
    s_k = symmetrize(x_test.T @ x_test / n_k)
    return n_k * gaussian_loglik(s_k, est.precision)


def _cv_fold_scores(x, folds, lambdas, cfg, opts, lla_iters=1):
    """Per-lambda CV totals over the given folds (NaN where any fit fails)."""
    n = x.shape[0]
    totals = np.zeros(len(lambdas))
    valid = np.ones(len(lambdas), dtype=bool)
    for fold in folds:
        train = np.setdiff1d(np.arange(n), fold)
        s_train = sample_covariance(x[train])
        path = fit_path(s_train, cfg, lambdas, opts, lla_iters)
        for i, est in enumerate(path):
            if est is None:
                valid[i] = False
            elif valid[i]:
                totals[i] += _heldout_loglik(x[fold], est)
    totals[~valid] = np.nan
    return totals


def kfold_cv_score(x, k: int, lam: float, cfg, opts=None, rng=None) -> float:
    """K-fold cross-validated log-likelihood at one lambda (maximize).

    Rows are partitioned into `k` near-equal folds by a seeded random
    permutation; each fold is scored on its held-out covariance against the
    fit on the complement. With ``k == n`` this is exact leave-one-out.
    """
    x = np.asarray(x, dtype=float)
    folds = _fold_indices(x.shape[0], k, rng)
    cfg = replace(cfg, lam=float(lam))
    totals = _cv_fold_scores(x, folds, np.array([lam]), cfg, opts)
    if np.isnan(totals[0]):
        raise GlassoTuneError(f"cross-validation fit failed at lambda={lam:.6g}")
    return float(totals[0])


def loocv_score(x, lam: float, cfg, opts=None) -> float:
    """Exact leave-one-out cross-validated log-likelihood (maximize)."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] < 3:
        raise ValueError("leave-one-out needs at least 3 rows")
    return kfold_cv_score(x, x.shape[0], lam, cfg, opts)


def gacv_score(x, s, est) -> float:
    """Closed-form approximation to the leave-one-out score (maximize).

    First-order expansion of the leave-one-out log-likelihood around the
    full-data fit: the full-data term ``n (log|Omega| - Tr(S Omega))`` plus,
    for each observation, the inner product of the likelihood gradient
    ``Omega^{-1} - x_i x_i^T`` with the approximate one-out perturbation
    ``Omega (x_i x_i^T - S) Omega / (n - 1)``, restricted to the nonzero
    entries of the estimate. Only p-by-p products are formed; no refits and
    no large inversions are required.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n < 3:
        raise ValueError("GACV needs at least 3 rows")
    omega = est.precision
    cov = est.covariance
    mask = (omega != 0.0).astype(float)

    full_term = n * gaussian_loglik(s, omega)

    a = omega @ s @ omega
    u = x @ omega  # row i holds Omega x_i
    v = x * u
    t1 = float(np.sum((cov * mask) * (u.T @ u)))
    t2 = n * float(np.sum(cov * mask * a))
    t3 = float(np.einsum("ij,jk,ik->", v, mask, v))
    t4 = n * float(np.sum(mask * a * s))
    correction = (t1 - t2 - t3 + t4) / (n - 1)
    return full_term + correction


def _argbest(scores: np.ndarray, direction: str) -> int:
    """Index of the best finite score; ties go to the smaller index.

    Grids are stored in decreasing order, so the smaller index is the larger
    lambda (the sparser model).
    """
    if np.all(np.isnan(scores)):
        raise GlassoTuneError("every grid point failed; nothing to select")
    if direction == "max":
        return int(np.nanargmax(scores))
    return int(np.nanargmin(scores))


def select(
    x,
    cfg: PenaltyConfig,
    selector: str,
    grid=None,
    opts=None,
    rng=None,
    k: int = 10,
    lla_iters: int = 1,
) -> SelectionResult:
    """Score every grid point under `selector` and refit at the winner.

    Parameters
    ----------
    x : ndarray, shape (n, p)
        Zero-mean observations, one per row.
    cfg : PenaltyConfig
        Penalty family; its `lam` field is overridden by each grid value.
    selector : str
        One of ``loocv``, ``kcv``, ``gacv``, ``bic``, ``aic``.
    grid : ndarray, optional
        Strictly decreasing lambda values; defaults to ``lambda_grid`` of
        the sample covariance.
    rng : numpy Generator or int seed, optional
        Drives the K-fold partition; required only for ``kcv``.
    k : int, optional
        Fold count for ``kcv`` (default 10).

    Returns
    -------
    SelectionResult
        Grid, per-lambda scores, the chosen lambda (ties toward the larger
        lambda), and the estimate fitted on the full data at that lambda.
        Grid points whose fit fails are skipped with a warning.
    """
    if selector not in SELECTOR_KINDS:
        raise ValueError(f"unknown selector {selector!r}")
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    s = sample_covariance(x)
    if grid is None:
        grid = lambda_grid(s)
    grid = np.asarray(grid, dtype=float)
    if len(grid) > 1 and not np.all(np.diff(grid) < 0):
        raise ValueError("lambda grid must be strictly decreasing")
    if np.any(grid <= 0):
        raise ValueError("lambda grid must be positive")
    if opts is None:
        opts = SolverOptions()
    if rng is not None and not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)

    if selector in (BIC, AIC, GACV):
        path = fit_path(s, cfg, grid, opts, lla_iters)
        scores = np.full(len(grid), np.nan)
        for i, est in enumerate(path):
            if est is None:
                continue
            if selector == BIC:
                scores[i] = bic_score(s, est, n)
            elif selector == AIC:
                scores[i] = aic_score(s, est, n)
            else:
                scores[i] = gacv_score(x, s, est)
        best = _argbest(scores, DIRECTION[selector])
        estimate = path[best]
    else:
        k_eff = n if selector == LOOCV else k
        folds = _fold_indices(n, k_eff, rng)
        scores = _cv_fold_scores(x, folds, grid, cfg, opts, lla_iters)
        if np.any(np.isnan(scores)):
            warnings.warn(
                f"{int(np.sum(np.isnan(scores)))} grid points failed and were "
                "excluded from selection",
                stacklevel=2,
            )
        best = _argbest(scores, DIRECTION[selector])
        estimate = fit_with_penalty(
            s, replace(cfg, lam=float(grid[best])), opts, lla_iters
        )

    return SelectionResult(
        grid=grid,
        scores=SelectorScores(selector, scores, DIRECTION[selector]),
        chosen_lambda=float(grid[best]),
        estimate=estimate,
    )
