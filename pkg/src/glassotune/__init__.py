"""Sparse precision matrix estimation with penalized Gaussian likelihood.

A weighted graphical lasso solver, three penalty families (lasso, adaptive
lasso, one-step SCAD), five tuning-parameter selectors (leave-one-out CV,
K-fold CV, a closed-form approximate leave-one-out score, BIC, AIC), and a
Monte-Carlo harness for replicated performance studies.
"""

from .errors import (
    ConfigError,
    DataParseError,
    DegenerateInputError,
    FoldTooSmallError,
    GlassoTuneError,
    NoConvergenceError,
    NotPositiveDefiniteError,
    TooFewRowsError,
)
from .linalg import (
    cholesky,
    gaussian_loglik,
    inverse_spd,
    log_det,
    sample_covariance,
    sample_mvn,
    spawn_rngs,
)
from .penalties import (
    PenaltyConfig,
    adaptive_weights,
    fit_path,
    fit_with_penalty,
    lasso_weights,
    scad_derivative,
    scad_weights,
)
from .selectors import (
    SelectionResult,
    SelectorScores,
    aic_score,
    bic_score,
    count_support,
    gacv_score,
    kfold_cv_score,
    lambda_grid,
    loocv_score,
    select,
)
from .simulate import (
    ReplicationResult,
    ScenarioSpec,
    StudySummary,
    count_fp_fn,
    entropy_loss,
    frobenius_loss,
    make_dense_exp,
    make_random_sparse,
    make_tridiagonal,
    run_replication,
    run_study,
    summarize,
)
from .solver import (
    PrecisionEstimate,
    SolverOptions,
    kkt_residual,
    soft_threshold,
    solve_weighted_glasso,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataParseError",
    "DegenerateInputError",
    "FoldTooSmallError",
    "GlassoTuneError",
    "NoConvergenceError",
    "NotPositiveDefiniteError",
    "PenaltyConfig",
    "PrecisionEstimate",
    "ReplicationResult",
    "ScenarioSpec",
    "SelectionResult",
    "SelectorScores",
    "SolverOptions",
    "StudySummary",
    "TooFewRowsError",
    "adaptive_weights",
    "aic_score",
    "bic_score",
    "cholesky",
    "count_fp_fn",
    "count_support",
    "entropy_loss",
    "fit_path",
    "fit_with_penalty",
    "frobenius_loss",
    "gacv_score",
    "gaussian_loglik",
    "inverse_spd",
    "kfold_cv_score",
    "kkt_residual",
    "lambda_grid",
    "lasso_weights",
    "log_det",
    "loocv_score",
    "make_dense_exp",
    "make_random_sparse",
    "make_tridiagonal",
    "run_replication",
    "run_study",
    "sample_covariance",
    "sample_mvn",
    "scad_derivative",
    "scad_weights",
    "select",
    "soft_threshold",
    "solve_weighted_glasso",
    "spawn_rngs",
    "summarize",
]
