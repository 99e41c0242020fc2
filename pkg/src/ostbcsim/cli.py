"""Command-line front end: run experiments, list presets, validate codes.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import experiments
from .codes import all_codes, export_catalog, validate_code
from .experiments import ConfigError


def _build_parser():
    p = argparse.ArgumentParser(
        prog="sim",
        description="Link-level Monte Carlo simulator for OSTBC broadcast "
                    "over dimension-reduced massive MIMO downlinks.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a figure experiment")
    run.add_argument("--figure", required=True,
                     help="figure id (see `sim list`)")
    run.add_argument("--seed", type=int, default=1, help="master RNG seed")
    run.add_argument("--trials", type=int, default=None,
                     help="Monte Carlo trials per point")
    run.add_argument("--out", default="results",
                     help="output directory for CSV files")
    run.add_argument("--config", default=None,
                     help="flat key=value config file with overrides")
    run.add_argument("--workers", type=int, default=0,
                     help="worker processes (0: SIM_WORKERS env or all cores)")

    sub.add_parser("list", help="list figure presets")

    val = sub.add_parser("validate-codes",
                         help="check every code's defining identities")
    val.add_argument("--dump-catalog", default=None, metavar="PATH",
                     help="also write the A/B matrix catalog as text")
    return p


def _cmd_run(args) -> int:
    overrides = {}
    if args.config:
        try:
            overrides.update(experiments.parse_config_file(args.config))
        except (ConfigError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
    overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.workers:
        overrides["workers"] = args.workers
    try:
        cfg = experiments.default_config(args.figure, **overrides)
        cfg.validate()
    except (ConfigError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        paths = experiments.run(cfg, args.out)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FloatingPointError, ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    dt = time.perf_counter() - t0
    for path in paths:
        print(path)
    print(f"done in {dt:.1f} s ({cfg.trials} trials, seed {cfg.seed})")
    return 0


def _cmd_list(_args) -> int:
    rows = experiments.list_figures()
    width = max(len(r[0]) for r in rows)
    print(f"{'figure':<{width}}  {'trials':>8}  {'runtime':>8}  description")
    for fid, desc, trials, runtime in rows:
        print(f"{fid:<{width}}  {trials:>8}  {runtime:>8}  {desc}")
    return 0


def _cmd_validate(args) -> int:
    worst = 0.0
    for code in all_codes():
        report = validate_code(code, rng=0)
        status = "ok" if report.ok() else "FAIL"
        print(f"{code.code_id.value:4s} max violation "
              f"{report.max_violation:.3e}  {status}")
        worst = max(worst, report.max_violation)
    if args.dump_catalog:
        with open(args.dump_catalog, "w") as fh:
            fh.write(export_catalog())
        print(f"catalog written to {args.dump_catalog}")
    if worst >= 1e-10:
        print("validation FAILED", file=sys.stderr)
        return 3
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "list":
        return _cmd_list(args)
    return _cmd_validate(args)


if __name__ == "__main__":
    sys.exit(main())
