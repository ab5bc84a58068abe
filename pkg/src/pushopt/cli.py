"""Command-line entry point: run experiments, sweep horizons, validate.

Exit codes: 0 success, 2 configuration error, 3 invariant violation,
4 benchmark-solver non-convergence.
"""

from __future__ import annotations

import argparse
import sys

from . import config as config_mod
from . import experiments
from .exceptions import ConfigError, InvariantViolation, SolverNonConvergence


def _add_common(parser):
    parser.add_argument("--config", required=True,
                        help="config file (.toml/.json) or preset name")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--algorithm", choices=("zo", "subgrad"), default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out", default="results")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pushopt",
        description="distributed online optimization over directed networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the configured experiment")
    _add_common(p_run)
    p_run.add_argument("--horizon", type=int, default=None)
    p_run.add_argument("--emit-trajectory", action="store_true")

    p_sweep = sub.add_parser("sweep", help="rerun across several horizons")
    _add_common(p_sweep)
    p_sweep.add_argument("--horizons", required=True,
                         help="comma-separated horizon list, e.g. 250,500,1000")

    p_val = sub.add_parser("validate", help="assert module invariants")
    _add_common(p_val)
    p_val.add_argument("--horizon", type=int, default=None)
    return parser


def _load_config(args):
    cfg = config_mod.load(args.config)
    algorithm = None
    if args.algorithm is not None:
        algorithm = "subgradient" if args.algorithm == "subgrad" else "zo"
    cfg = cfg.override(
        seed=args.seed,
        trials=args.trials,
        workers=args.workers,
        algorithm=algorithm,
        horizon=getattr(args, "horizon", None),
    )
    if getattr(args, "emit_trajectory", False):
        cfg = cfg.override(emit_trajectory=True)
    return cfg


def cmd_run(args):
    cfg = _load_config(args)
    result = experiments.run_experiment(cfg, out_dir=args.out)
    inv = result.manifest["invariants"]
    print(f"wrote {args.out}/regret.csv, diag.csv, manifest.json")
    print(
        f"horizon={cfg.horizon} trials={cfg.trials} seed={cfg.seed} "
        f"max avg regret={result.summary.max_regret[-1] / (cfg.horizon + 1):.6g}"
    )
    for name in ("col_sum_err_max", "row_sum_err_max", "phi_drift_max"):
        print(f"  {name} = {inv[name]:.3e}")
    return 0


def cmd_sweep(args):
    cfg = _load_config(args)
    try:
        horizons = [int(h) for h in args.horizons.split(",") if h.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad horizon list {args.horizons!r}") from exc
    if not horizons:
        raise ConfigError("empty horizon list")
    rows = experiments.sweep(cfg, horizons, out_dir=args.out)
    print("T,max_avg_regret,min_avg_regret")
    for T, hi, lo in rows:
        print(f"{T},{hi:.6g},{lo:.6g}")
    return 0


def cmd_validate(args):
    cfg = _load_config(args)
    checks = experiments.validate(cfg)
    failed = False
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<24} {detail}")
        failed = failed or not ok
    return 3 if failed else 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"run": cmd_run, "sweep": cmd_sweep, "validate": cmd_validate}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except SolverNonConvergence as exc:
        print(f"solver non-convergence: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
