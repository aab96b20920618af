"""Penalty families and the per-lambda fitting orchestration.

Three families are supported: plain lasso (constant weights), adaptive lasso
(weights ``lam / |initial_ij|**gamma`` from an initial consistent estimate),
and SCAD via one-step local linear approximation (weights equal to the SCAD
derivative at the initial estimate, per Fan and Li, 2001). Adaptive-lasso and
SCAD fits are two-stage: stage one is a plain lasso fit at the same lambda,
stage two re-solves with the reweighted penalty.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import GlassoTuneError
from .linalg import check_symmetric
from .solver import SolverOptions, _package, _solve_core, solve_weighted_glasso, validate_weights

LASSO = "lasso"
ADAPTIVE_LASSO = "adaptive-lasso"
SCAD = "scad"
PENALTY_KINDS = (LASSO, ADAPTIVE_LASSO, SCAD)


@dataclass(frozen=True)
class PenaltyConfig:
    """A penalty family with its scalar tuning parameter.

    `gamma` applies to the adaptive lasso only (default 0.5); `a` applies to
    SCAD only (default 3.7).
    """

    kind: str
    lam: float
    gamma: float = 0.5
    a: float = 3.7

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.a <= 2:
            raise ValueError("a must exceed 2")


def scad_derivative(x, lam, a=3.7):
    """Derivative of the SCAD penalty at |x|.

    Equals `lam` for ``x <= lam``, decays linearly as ``(a*lam - x) / (a-1)``
    for ``lam < x < a*lam``, and is zero beyond ``a*lam``. Continuous in `x`;
    never exceeds `lam`. Accepts scalars or arrays (elementwise).
    """
    if a <= 2:
        raise ValueError("a must exceed 2")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or lam < 0:
        raise ValueError("x and lam must be nonnegative")
    out = np.where(x <= lam, lam, np.maximum(a * lam - x, 0.0) / (a - 1.0))
    return float(out) if out.ndim == 0 else out


def lasso_weights(cfg: PenaltyConfig, p: int) -> np.ndarray:
    """Constant weight matrix ``w_ij = lam``, diagonal included."""
    if cfg.kind != LASSO:
        raise ValueError(f"expected lasso config, got {cfg.kind!r}")
    return np.full((p, p), cfg.lam)


def adaptive_weights(cfg: PenaltyConfig, initial) -> np.ndarray:
    """Adaptive-lasso weights ``lam / |initial_ij|**gamma``.

    Entries where the initial estimate is exactly zero get infinite weight,
    pinning them to zero in the second-stage fit (the exact limit of the
    rule as the initial entry vanishes).
    """
    if cfg.kind != ADAPTIVE_LASSO:
        raise ValueError(f"expected adaptive-lasso config, got {cfg.kind!r}")
    om = np.abs(initial.precision)
    with np.errstate(divide="ignore"):
        w = np.where(om > 0.0, cfg.lam / om**cfg.gamma, np.inf)
    return validate_weights(w)


def scad_weights(cfg: PenaltyConfig, initial) -> np.ndarray:
    """One-step LLA weights: the SCAD derivative at the initial estimate.

    Zero initial entries get the full rate `lam`; entries at or beyond
    ``a * lam`` get weight zero (no shrinkage of large elements).
    """
    if cfg.kind != SCAD:
        raise ValueError(f"expected scad config, got {cfg.kind!r}")
    return scad_derivative(np.abs(initial.precision), cfg.lam, cfg.a)


def _stage_weights(cfg, stage, p, initial):
    if stage == 0 or cfg.kind == LASSO:
        return np.full((p, p), cfg.lam)
    if cfg.kind == ADAPTIVE_LASSO:
        return adaptive_weights(cfg, initial)
    return scad_weights(cfg, initial)


def _n_stages(cfg, lla_iters):
    return 1 if cfg.kind == LASSO else 1 + lla_iters


def fit_with_penalty(s, cfg, opts=None, lla_iters=1):
    """Fit the precision matrix at one lambda under the configured penalty.

    Lasso is a single weighted-glasso solve. Adaptive lasso and SCAD first
    fit a plain lasso at the same lambda as the initial consistent estimate,
    then re-solve with the reweighted penalty; `lla_iters` controls how many
    reweighting passes are applied (default one, the one-step rule).
    """
    if lla_iters < 1:
        raise ValueError("lla_iters must be at least 1")
    p = s.shape[0]
    est = None
    for stage in range(_n_stages(cfg, lla_iters)):
        est = solve_weighted_glasso(s, _stage_weights(cfg, stage, p, est), opts)
    return est


def fit_path(s, cfg, lambdas, opts=None, lla_iters=1):
    """Fit the penalty along a decreasing lambda grid with warm starts.

    Each stage of each fit starts from the working state of the same stage
    at the previous grid point. A grid point whose fit fails is reported as
    None after a warning; later points continue from the last good state.

    Returns
    -------
    list of (PrecisionEstimate or None), aligned with `lambdas`.
    """
    if lla_iters < 1:
        raise ValueError("lla_iters must be at least 1")
    if opts is None:
        opts = SolverOptions()
    s = check_symmetric(s, "covariance")
    p = s.shape[0]
    n_stages = _n_stages(cfg, lla_iters)
    warm = [None] * n_stages
    path = []
    for lam in lambdas:
        cfg_lam = replace(cfg, lam=float(lam))
        est = None
        try:
            for stage in range(n_stages):
                weights = _stage_weights(cfg_lam, stage, p, est)
                omega, w_work, b = _solve_core(s, weights, opts, init=warm[stage])
                warm[stage] = (w_work, b)
                est = _package(omega)
        except GlassoTuneError as exc:
            warnings.warn(
                f"fit failed at lambda={lam:.6g}: {exc}; grid point skipped",
                stacklevel=2,
            )
            est = None
        path.append(est)
    return path
