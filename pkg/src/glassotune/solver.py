"""Weighted graphical lasso solver.

Maximizes the penalized Gaussian log-likelihood

    log|Omega| - Tr(S Omega) - sum_ij w_ij |omega_ij|

over symmetric positive-definite matrices, for an arbitrary symmetric
nonnegative weight matrix ``w``. The algorithm is the block coordinate
descent of Friedman, Hastie and Tibshirani (2008): sweep over columns of a
working covariance matrix, solving one lasso subproblem per column by cyclic
coordinate descent with soft thresholding.

A weight of ``np.inf`` pins the corresponding precision entry to exactly
zero. The diagonal penalty enters through the working covariance
``W = S + diag(w_ii)``; soft thresholding never applies to the diagonal,
which must stay positive.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergenceError, NotPositiveDefiniteError
from .linalg import check_symmetric, cholesky, inverse_spd, symmetrize

# After back-transformation from the working covariance, off-diagonal entries
# below ZERO_RTOL times the largest diagonal of Omega-hat are set to exact
# zero: coordinate descent produces exact zeros in beta-space but the
# reconstruction reintroduces round-off, and the support set needs a hard
# definition.
ZERO_RTOL = 1e-8


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and iteration budgets for the block coordinate descent."""

    outer_tol: float = 1e-5
    inner_tol: float = 1e-7
    max_outer: int = 200
    max_inner: int = 1000

    def __post_init__(self):
        for name in ("outer_tol", "inner_tol", "max_outer", "max_inner"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class PrecisionEstimate:
    """A fitted precision matrix with its inverse and support set.

    Attributes
    ----------
    precision : ndarray, shape (p, p)
        The estimate Omega-hat, exactly symmetric, with exact zeros at
        pruned entries.
    covariance : ndarray, shape (p, p)
        Its inverse, computed by Cholesky factorization of `precision`.
    support : frozenset of (int, int)
        Index pairs (i, j) with i <= j and a nonzero precision entry.
    """

    precision: np.ndarray
    covariance: np.ndarray
    support: frozenset

    @property
    def p(self) -> int:
        return self.precision.shape[0]


def validate_weights(w, p: int = None) -> np.ndarray:
    """Check that `w` is a symmetric nonnegative weight matrix.

    Off-diagonal entries may be ``np.inf`` (pin to zero); diagonal entries
    must be finite so the working covariance stays well defined.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"weights must be square, got shape {w.shape}")
    if p is not None and w.shape[0] != p:
        raise ValueError(f"weights have dimension {w.shape[0]}, expected {p}")
    if not np.array_equal(w, w.T):
        raise ValueError("weights must be symmetric")
    if np.any(w < 0) or np.any(np.isnan(w)):
        raise ValueError("weights must be nonnegative")
    if not np.all(np.isfinite(np.diag(w))):
        raise ValueError("diagonal weights must be finite")
    return w


def soft_threshold(x, t):
    """Soft-thresholding operator ``sign(x) * max(|x| - t, 0)``.

    Works elementwise on arrays; `t` must be nonnegative.
    """
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _lasso_cd(w11, s12, w12, beta, tol, max_iter):
    """Cyclic coordinate descent for one column subproblem.

    Minimizes ``0.5 b' W11 b - s12' b + sum_k w12_k |b_k|``, updating `beta`
    in place. Coordinates with infinite weight are held at exactly zero.
    Stops when the subgradient residual of a full pass falls below
    ``tol * max|s12|``.
    """
    free = np.isfinite(w12)
    beta[~free] = 0.0
    if not np.any(free):
        return beta
    scale = max(float(np.max(np.abs(s12))), 1e-300)
    diag = np.diag(w11)
    order = np.flatnonzero(free)
    q = w11 @ beta
    for _ in range(max_iter):
        for k in order:
            g = s12[k] - q[k] + diag[k] * beta[k]
            b_new = soft_threshold(g, w12[k]) / diag[k]
            step = b_new - beta[k]
            if step != 0.0:
                q += w11[:, k] * step
                beta[k] = b_new
        # Stationarity check on the exact gradient (q refreshed to cancel
        # incremental drift), restricted to free coordinates.
        q = w11 @ beta
        grad = (s12 - q)[free]
        b_free = beta[free]
        w_free = w12[free]
        viol = np.where(
            b_free != 0.0,
            np.abs(grad - w_free * np.sign(b_free)),
            np.maximum(np.abs(grad) - w_free, 0.0),
        )
        if float(np.max(viol)) <= tol * scale:
            break
    return beta


def _assemble_precision(w_work, b, indices):
    """Recover Omega column-by-column from the working covariance and betas."""
    p = w_work.shape[0]
    omega = np.empty((p, p))
    for j in range(p):
        idx = indices[j]
        beta = b[idx, j]
        denom = w_work[j, j] - float(beta @ w_work[idx, j])
        if denom <= 0.0:
            raise NotPositiveDefiniteError(
                "working covariance lost positive definiteness during recovery"
            )
        omega_jj = 1.0 / denom
        omega[j, j] = omega_jj
        omega[idx, j] = -beta * omega_jj
    return symmetrize(omega)


def _penalized_objective(s, omega, weights):
    """Objective value at `omega`; -inf if `omega` is not positive definite."""
    sign, logabsdet = np.linalg.slogdet(omega)
    if sign <= 0:
        return -np.inf
    finite = np.isfinite(weights)
    penalty = float(np.sum(np.where(finite, weights, 0.0) * np.abs(omega)))
    return logabsdet - float(np.sum(s * omega)) - penalty


def _solve_core(s, weights, opts, init=None, trace=None):
    """Run the sweeps; return (omega, w_work, b) without final packaging."""
    p = s.shape[0]
    w_diag = np.diag(weights).copy()
    if np.any(np.diag(s) + w_diag <= 0.0):
        raise NotPositiveDefiniteError(
            "working covariance has a nonpositive diagonal; singular input "
            "needs positive diagonal weights"
        )

    if init is not None:
        w_work = init[0].copy()
        b = init[1].copy()
    else:
        w_work = s.copy()
        b = np.zeros((p, p))
    np.fill_diagonal(w_work, np.diag(s) + w_diag)

    if p == 1:
        omega = np.array([[1.0 / w_work[0, 0]]])
        if trace is not None:
            trace.append(_penalized_objective(s, omega, weights))
        return omega, w_work, b

    indices = [np.flatnonzero(np.arange(p) != j) for j in range(p)]
    off_mask = ~np.eye(p, dtype=bool)
    scale = float(np.mean(np.abs(s[off_mask])))
    threshold = opts.outer_tol * scale

    converged = False
    last_change = np.inf
    for _sweep in range(opts.max_outer):
        max_change = 0.0
        for j in range(p):
            idx = indices[j]
            w11 = w_work[np.ix_(idx, idx)]
            beta = _lasso_cd(
                w11, s[idx, j], weights[idx, j], b[idx, j].copy(),
                opts.inner_tol, opts.max_inner,
            )
            new_col = w11 @ beta
            change = float(np.max(np.abs(w_work[idx, j] - new_col)))
            max_change = max(max_change, change)
            w_work[idx, j] = new_col
            w_work[j, idx] = new_col
            b[idx, j] = beta
        if trace is not None:
            try:
                omega_now = _assemble_precision(w_work, b, indices)
                trace.append(_penalized_objective(s, omega_now, weights))
            except NotPositiveDefiniteError:
                trace.append(-np.inf)
        last_change = max_change
        if max_change <= threshold:
            converged = True
            break
    if not converged:
        raise NoConvergenceError(
            f"no convergence after {opts.max_outer} sweeps "
            f"(last change {last_change:.3e}, threshold {threshold:.3e})",
            last_change=last_change,
            threshold=threshold,
            sweeps=opts.max_outer,
        )
    return _assemble_precision(w_work, b, indices), w_work, b


def _package(omega):
    """Hard-zero tiny off-diagonals and build the PrecisionEstimate."""
    p = omega.shape[0]
    cut = ZERO_RTOL * float(np.max(np.diag(omega)))
    off = ~np.eye(p, dtype=bool)
    omega[off & (np.abs(omega) < cut)] = 0.0
    covariance = inverse_spd(cholesky(omega))
    support = frozenset(
        (i, j) for i in range(p) for j in range(i, p) if omega[i, j] != 0.0
    )
    return PrecisionEstimate(precision=omega, covariance=covariance, support=support)


def solve_weighted_glasso(s, weights, opts=None, init=None, return_trace=False):
    """Fit the weighted graphical lasso.

    Parameters
    ----------
    s : ndarray, shape (p, p)
        Symmetric sample covariance. May be singular provided every diagonal
        weight is positive (the working covariance ``S + diag(w_ii)`` must
        be positive definite).
    weights : ndarray, shape (p, p)
        Symmetric nonnegative penalty weights; ``np.inf`` off the diagonal
        pins that entry to exactly zero.
    opts : SolverOptions, optional
    init : (ndarray, ndarray), optional
        Warm start ``(w_work, b)`` from a previous solve, typically at the
        adjacent point of a regularization path. The diagonal of the working
        covariance is reset to match the current weights.
    return_trace : bool, optional
        If True, also return the penalized objective evaluated after each
        outer sweep.

    Returns
    -------
    est : PrecisionEstimate
    trace : list of float
        Only if `return_trace` is True.

    Raises
    ------
    NotPositiveDefiniteError
        Singular input with a zero diagonal weight, or loss of positive
        definiteness during recovery.
    NoConvergenceError
        Iteration budget exhausted; carries the last sweep change.
    """
    s = check_symmetric(s, "covariance")
    weights = validate_weights(weights, s.shape[0])
    if opts is None:
        opts = SolverOptions()
    if not np.any(weights):
        # Unpenalized problem: the maximizer is the plain inverse.
        omega = inverse_spd(cholesky(s))
        est = _package(omega)
        if return_trace:
            return est, [_penalized_objective(s, est.precision, weights)]
        return est
    trace = [] if return_trace else None
    omega, _, _ = _solve_core(s, weights, opts, init=init, trace=trace)
    est = _package(omega)
    if return_trace:
        return est, trace
    return est


def kkt_residual(s, est, weights) -> float:
    """Max violation of the stationarity conditions at `est`.

    For each entry: ``|(Omega^-1 - S)_ij - w_ij sign(omega_ij)|`` when
    ``omega_ij != 0``; ``max(|(Omega^-1 - S)_ij| - w_ij, 0)`` when the entry
    is zero with finite weight; zero when the weight is infinite.
    """
    weights = np.asarray(weights, dtype=float)
    r = est.covariance - s
    omega = est.precision
    finite = np.isfinite(weights)
    with np.errstate(invalid="ignore"):
        at_nonzero = np.abs(r - weights * np.sign(omega))
    at_zero = np.maximum(np.abs(r) - weights, 0.0)
    viol = np.where(omega != 0.0, at_nonzero, at_zero)
    viol = np.where(finite, viol, 0.0)
    return float(np.max(viol))
