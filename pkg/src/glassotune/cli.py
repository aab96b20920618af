"""Command-line interface.

Four subcommands: ``estimate`` fits a precision matrix to a data file and
writes the estimate, its support edge list, the chosen lambda, and the
per-lambda score table; ``path`` writes the score table only; ``simulate``
runs a replicated Monte-Carlo study from a config file; ``graph`` converts
an estimate into a DOT graph.

Exit codes: 0 success, 1 user or configuration error, 2 numerical failure.
The default seed may be overridden with the ``GLASSOTUNE_SEED`` environment
variable.
"""

import argparse
import os
import sys

import numpy as np

from . import io
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
from .linalg import sample_covariance
from .penalties import PENALTY_KINDS, PenaltyConfig, fit_with_penalty
from .selectors import SELECTOR_KINDS, lambda_grid, select
from .simulate import SCENARIO_KINDS, ScenarioSpec, run_study
from .io import format_summary_table
from .solver import SolverOptions

DEFAULT_SEED = 20090601

# simulate config schema: key -> (parser, default)
_SIM_KEYS = {
    "scenarios": (lambda v: _parse_list(v, SCENARIO_KINDS, "scenario"), ["tridiagonal"]),
    "penalties": (lambda v: _parse_list(v, PENALTY_KINDS, "penalty"), ["lasso"]),
    "selectors": (lambda v: _parse_list(v, SELECTOR_KINDS, "selector"), ["bic"]),
    "p": (lambda v: _parse_int(v, "p", lo=2), 20),
    "n": (lambda v: [_parse_int(t, "n", lo=3) for t in v.split(",")], [100]),
    "reps": (lambda v: _parse_int(v, "reps", lo=2), 100),
    "seed": (lambda v: _parse_int(v, "seed"), None),
    "gamma": (lambda v: _parse_float(v, "gamma", lo=0.0, lo_open=True), 0.5),
    "a": (lambda v: _parse_float(v, "a", lo=2.0, lo_open=True), 3.7),
    "k_folds": (lambda v: _parse_int(v, "k_folds", lo=2), 10),
    "grid_count": (lambda v: _parse_int(v, "grid_count", lo=2), 50),
    "grid_ratio": (lambda v: _parse_float(v, "grid_ratio", lo=0.0, hi=1.0, open_ends=True), 0.01),
    "sparse_zero_prob": (lambda v: _parse_float(v, "sparse_zero_prob", lo=0.0, hi=1.0, open_ends=True), 0.8),
    "outer_tol": (lambda v: _parse_float(v, "outer_tol", lo=0.0, lo_open=True), 1e-5),
    "inner_tol": (lambda v: _parse_float(v, "inner_tol", lo=0.0, lo_open=True), 1e-7),
    "max_outer": (lambda v: _parse_int(v, "max_outer", lo=1), 200),
    "max_inner": (lambda v: _parse_int(v, "max_inner", lo=1), 1000),
    "lla_iters": (lambda v: _parse_int(v, "lla_iters", lo=1), 1),
    "jobs": (lambda v: _parse_int(v, "jobs", lo=1), 1),
    "redraw_sparse": (lambda v: _parse_bool(v, "redraw_sparse"), True),
    "output_dir": (str, "."),
}


def _parse_int(v, name, lo=None):
    try:
        out = int(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected an integer, got {v!r}")
    if lo is not None and out < lo:
        raise ConfigError(f"{name}: must be >= {lo}, got {out}")
    return out


def _parse_float(v, name, lo=None, hi=None, lo_open=False, open_ends=False):
    try:
        out = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a number, got {v!r}")
    if lo is not None and (out <= lo if (lo_open or open_ends) else out < lo):
        raise ConfigError(f"{name}: out of range, got {out}")
    if hi is not None and (out >= hi if open_ends else out > hi):
        raise ConfigError(f"{name}: out of range, got {out}")
    return out


def _parse_bool(v, name):
    if isinstance(v, bool):
        return v
    if str(v).lower() in ("1", "true", "yes", "on"):
        return True
    if str(v).lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{name}: expected a boolean, got {v!r}")


def _parse_list(v, allowed, name):
    items = [t.strip() for t in str(v).split(",") if t.strip()]
    for t in items:
        if t not in allowed:
            raise ConfigError(f"unknown {name} {t!r}; allowed: {', '.join(allowed)}")
    if not items:
        raise ConfigError(f"{name} list is empty")
    return items


def read_config(path) -> dict:
    """Parse a flat ``key = value`` config file; unknown keys are rejected."""
    raw = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (t.strip() for t in line.split("=", 1))
            if key not in _SIM_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            raw[key] = value
    return raw


def _default_seed() -> int:
    env = os.environ.get("GLASSOTUNE_SEED")
    if env is not None:
        return _parse_int(env, "GLASSOTUNE_SEED")
    return DEFAULT_SEED


def _solver_options(args) -> SolverOptions:
    try:
        return SolverOptions(
            outer_tol=args.outer_tol,
            inner_tol=args.inner_tol,
            max_outer=args.max_outer,
            max_inner=args.max_inner,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _penalty_config(kind, lam, gamma, a) -> PenaltyConfig:
    try:
        return PenaltyConfig(kind=kind, lam=lam, gamma=gamma, a=a)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _add_solver_flags(sub):
    sub.add_argument("--outer-tol", type=float, default=1e-5)
    sub.add_argument("--inner-tol", type=float, default=1e-7)
    sub.add_argument("--max-outer", type=int, default=200)
    sub.add_argument("--max-inner", type=int, default=1000)


def _add_fit_flags(sub):
    sub.add_argument("--input", required=True, help="delimited data file")
    sub.add_argument("--penalty", choices=PENALTY_KINDS, default="lasso")
    sub.add_argument("--selector", choices=SELECTOR_KINDS, default="bic")
    sub.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="fixed lambda; skips selection")
    sub.add_argument("--gamma", type=float, default=0.5)
    sub.add_argument("--a", type=float, default=3.7)
    sub.add_argument("--k-folds", type=int, default=10)
    sub.add_argument("--grid-count", type=int, default=50)
    sub.add_argument("--grid-ratio", type=float, default=0.01)
    sub.add_argument("--lla-iters", type=int, default=1)
    sub.add_argument("--center", action="store_true",
                     help="subtract column means before fitting")
    sub.add_argument("--seed", type=int, default=None)
    _add_solver_flags(sub)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glassotune",
        description="Sparse precision matrix estimation with tuning-parameter selection.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    est = subs.add_parser("estimate", help="fit a precision matrix to a data file")
    _add_fit_flags(est)
    est.add_argument("--output-prefix", required=True,
                     help="prefix for the four output files")

    pth = subs.add_parser("path", help="write the per-lambda score table only")
    _add_fit_flags(pth)
    pth.add_argument("--output", required=True, help="score table destination")

    sim = subs.add_parser("simulate", help="run a replicated Monte-Carlo study")
    sim.add_argument("--config", default=None, help="flat key = value file")
    for key in _SIM_KEYS:
        flag = "--" + key.replace("_", "-")
        sim.add_argument(flag, dest=f"cfg_{key}", default=None)

    gr = subs.add_parser("graph", help="convert an estimate to a DOT graph")
    gr.add_argument("--estimate", required=True,
                    help="precision matrix file written by estimate")
    gr.add_argument("--output", required=True, help="DOT file destination")
    return parser


def _fit_from_args(args):
    """Shared estimate/path pipeline: ingest, select (or fixed fit), score."""
    data = io.ingest(args.input, center=args.center)
    seed = args.seed if args.seed is not None else _default_seed()
    opts = _solver_options(args)
    lam0 = args.lam if args.lam is not None else 0.0
    cfg = _penalty_config(args.penalty, lam0, args.gamma, args.a)
    s = sample_covariance(data)

    if args.lam is not None:
        est = fit_with_penalty(s, cfg, opts, lla_iters=args.lla_iters)
        return data, cfg, None, est, args.lam

    grid = lambda_grid(s, args.grid_count, args.grid_ratio)
    res = select(
        data, cfg, args.selector, grid, opts,
        rng=np.random.default_rng(seed), k=args.k_folds, lla_iters=args.lla_iters,
    )
    return data, cfg, res, res.estimate, res.chosen_lambda


def cmd_estimate(args) -> int:
    _, _, res, est, lam = _fit_from_args(args)
    prefix = args.output_prefix
    io.write_matrix(prefix + ".omega.txt", est.precision)
    io.write_edges(prefix + ".edges.txt", est)
    io.write_chosen_lambda(prefix + ".lambda.txt", lam)
    if res is not None:
        io.write_scores(prefix + ".scores.txt", res.grid, res.scores.scores,
                        res.scores.selector)
    return 0


def cmd_path(args) -> int:
    if args.lam is not None:
        raise ConfigError("path requires a selector; --lambda makes no sense here")
    _, _, res, _, _ = _fit_from_args(args)
    io.write_scores(args.output, res.grid, res.scores.scores, res.scores.selector)
    return 0


def cmd_simulate(args) -> int:
    settings = {key: default for key, (_, default) in _SIM_KEYS.items()}
    if args.config is not None:
        raw = read_config(args.config)
        for key, value in raw.items():
            settings[key] = _SIM_KEYS[key][0](value)
    for key in _SIM_KEYS:
        override = getattr(args, f"cfg_{key}")
        if override is not None:
            settings[key] = _SIM_KEYS[key][0](override)
    seed = settings["seed"]
    if seed is None:
        seed = _default_seed()

    scenarios = [
        ScenarioSpec(kind=k, p=settings["p"], sparse_zero_prob=settings["sparse_zero_prob"])
        for k in settings["scenarios"]
    ]
    penalties = [
        _penalty_config(k, 0.0, settings["gamma"], settings["a"])
        for k in settings["penalties"]
    ]
    opts = SolverOptions(
        outer_tol=settings["outer_tol"], inner_tol=settings["inner_tol"],
        max_outer=settings["max_outer"], max_inner=settings["max_inner"],
    )
    results, summary = run_study(
        scenarios, settings["n"], penalties, settings["selectors"],
        reps=settings["reps"], root_seed=seed,
        grid_count=settings["grid_count"], grid_ratio=settings["grid_ratio"],
        opts=opts, k=settings["k_folds"], lla_iters=settings["lla_iters"],
        redraw_sparse=settings["redraw_sparse"], jobs=settings["jobs"],
    )
    outdir = settings["output_dir"]
    os.makedirs(outdir, exist_ok=True)
    io.write_raw_dump(os.path.join(outdir, "raw_replications.csv"), results)
    io.write_summary(os.path.join(outdir, "summary.csv"), summary)
    print(format_summary_table(summary))
    return 0


def cmd_graph(args) -> int:
    omega = io.read_matrix(args.estimate)
    io.write_dot(args.output, omega)
    return 0


_COMMANDS = {
    "estimate": cmd_estimate,
    "path": cmd_path,
    "simulate": cmd_simulate,
    "graph": cmd_graph,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are user errors here.
        return 0 if exc.code in (0, None) else 1
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, DataParseError, TooFewRowsError, DegenerateInputError,
            FoldTooSmallError, ValueError, FileNotFoundError,
            IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NotPositiveDefiniteError, NoConvergenceError, GlassoTuneError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
