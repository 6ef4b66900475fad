"""Command line entry point.

Subcommands: ``scenario-table``, ``norm-study``, ``toy1d`` and ``optimize``.
Every subcommand requires ``--seed`` and ``--out``; ``--config`` loads a
``key = value`` file and individual flags override its keys.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager

import numpy as np

from . import bench
from .config import ExperimentConfig, load_config
from .domain import Box

# config keys that can be overridden from the command line
_OVERRIDES = {
    "kernel": str, "lengthscale": float, "sigma": float, "delta": float, "gamma": float,
    "kappa": float, "alpha_bar": float, "m": int, "n_cubes": int, "delta_cube": float,
    "grid_points": int, "iterations": int, "threshold": float, "ridge": str,
}


def _common(p: argparse.ArgumentParser, with_config: bool = True):
    p.add_argument("--seed", type=int, required=True, help="base random seed")
    p.add_argument("--out", required=True, help="output CSV path, '-' for stdout")
    if with_config:
        p.add_argument("--config", help="key = value configuration file")
        for key, typ in _OVERRIDES.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenario-safebo",
        description="Safe Bayesian optimization with scenario-certified RKHS norm bounds.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenario-table", help="scenario hyperparameter sweeps")
    p.add_argument("--kind", choices=sorted(bench.SCENARIO_TABLES), required=True)
    _common(p, with_config=False)

    p = sub.add_parser("norm-study", help="certificate tightness on random truths")
    p.add_argument("--functions", type=int, default=50)
    p.add_argument("--summary", help="summary CSV path (default: <out>.summary.csv)")
    p.add_argument("--workers", type=int, default=1)
    _common(p)

    p = sub.add_parser("toy1d", help="1D toy benchmark run")
    p.add_argument("--mode", choices=("ours", "fixed"), default="ours")
    p.add_argument("--fixed-b", type=float, default=25.0,
                   help="norm bound used by --mode fixed")
    _common(p)

    p = sub.add_parser("optimize", help="safe optimization of a builtin or external objective")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", choices=bench.BUILTIN_OBJECTIVES)
    src.add_argument("--command", help="objective command; reads parameters on stdin, "
                                       "prints one reward")
    p.add_argument("--dim", type=int, default=1, help="dimension of the unit-cube domain")
    p.add_argument("--lo", type=float, nargs="+", help="domain lower corner")
    p.add_argument("--hi", type=float, nargs="+", help="domain upper corner")
    p.add_argument("--seed-point", type=float, nargs="+", action="append",
                   help="initial safe parameter (repeatable)")
    p.add_argument("--timeout", type=float, default=None,
                   help="seconds allowed per objective evaluation")
    _common(p)
    return parser


def _config(args) -> ExperimentConfig:
    overrides = {k: getattr(args, k) for k in _OVERRIDES}
    overrides["seed"] = args.seed
    if args.config:
        return load_config(args.config, **overrides)
    return ExperimentConfig().with_overrides(**overrides)


@contextmanager
def _output(path):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _domain(args) -> Box:
    if args.lo is not None or args.hi is not None:
        if args.lo is None or args.hi is None or len(args.lo) != len(args.hi):
            raise SystemExit("--lo and --hi must be given together with equal lengths")
        return Box(args.lo, args.hi)
    return Box.unit(args.dim)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "scenario-table":
        with _output(args.out) as fh:
            bench.write_table(args.kind, fh)
        return 0

    config = _config(args)
    if args.command == "norm-study":
        result = bench.norm_study(config, args.functions, config.iterations, args.workers)
        with _output(args.out) as fh:
            result.write_csv(fh)
        summary = args.summary or (None if args.out == "-" else args.out + ".summary.csv")
        if summary:
            result.write_summary(summary)
        print(f"functions ever under-estimating: {result.ever_under}/{args.functions}; "
              f"mean final ratio {result.final_mean:.4f}", file=sys.stderr)
        return 0

    if args.command == "toy1d":
        log = bench.toy1d(config, args.mode, args.fixed_b)
    else:
        if args.builtin:
            objective, domain, seeds = bench.builtin_objective(args.builtin, config)
        else:
            if not args.seed_point:
                raise SystemExit("--seed-point is required with --command")
            domain = _domain(args)
            seeds = np.array(args.seed_point, dtype=float)
            objective = bench.ExternalObjective(args.command, timeout=args.timeout)
        log = bench.optimize(config, objective, domain, seeds)
    with _output(args.out) as fh:
        log.write_csv(fh)
    print(f"{len(log)} iterations, {log.violations} violations, stop: {log.stop_reason}",
          file=sys.stderr)
    return 1 if log.stop_reason.startswith("objective error") else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
