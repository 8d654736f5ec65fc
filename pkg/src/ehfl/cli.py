"""Command-line interface: run / sweep / analyze.

Exit codes: 0 success, 1 hard configuration error, 2 run divergence.
The output directory may be overridden with the EHFL_OUT environment
variable (command-line --out wins when both are given).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import analytics
from .config import ConfigError, ExperimentConfig, parse_axes_file, parse_config_file
from .harness import (SweepSpec, metrics_csv, run, run_id_for, summary_csv,
                      sweep, write_text)
from .objectives import DivergenceError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ehfl",
        description="Battery-aware energy-harvesting federated learning simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one seeded simulation")
    p_run.add_argument("--config", required=True, help="INI config file")
    p_run.add_argument("--algorithm", help="override the configured algorithm")
    p_run.add_argument("--seed", type=int, help="override the configured seed")
    p_run.add_argument("--out", help="output directory")

    p_sweep = sub.add_parser("sweep", help="run a grid of configurations")
    p_sweep.add_argument("--config", required=True, help="INI base config file")
    p_sweep.add_argument("--grid", help="INI axes file (defaults to [axes] in --config)")
    p_sweep.add_argument("--out", help="output directory")
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel cell workers")

    p_an = sub.add_parser("analyze", help="participation-probability analytics")
    p_an.add_argument("--N", type=int, required=True, help="client count")
    p_an.add_argument("--G", type=int, default=None, help="group count (echoed only)")
    p_an.add_argument("--S", type=int, required=True, help="slots per epoch")
    p_an.add_argument("--kappa", type=int, required=True, help="training cost in units/slots")
    p_an.add_argument("--delta", type=float, required=True, help="charging probability")
    p_an.add_argument("--epsilon", type=float, default=None,
                      help="target uniform participation bound (default 1/(6*sqrt(N)))")
    p_an.add_argument("--E-max", dest="e_max", type=int, default=None,
                      help="battery capacity for the p(m) table (default kappa + 5)")
    return parser


def _out_dir(arg: str | None) -> Path:
    if arg:
        return Path(arg)
    env = os.environ.get("EHFL_OUT")
    return Path(env) if env else Path(".")


def cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = parse_config_file(args.config)
        if args.algorithm:
            cfg = replace(cfg, algorithm=args.algorithm)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        result = run(cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as err:
        print(f"run diverged at epoch {err.epoch}: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    out = _out_dir(args.out)
    rid = run_id_for(cfg)
    write_text(out / "metrics.csv", metrics_csv([(rid, result)]))
    summary = {
        "run_id": rid,
        "algorithm": cfg.algorithm,
        "seed": cfg.seed,
        "total_energy": result.total_energy,
        "harvested": result.ledger.harvested_total,
        "wasted_by_cap": result.ledger.wasted_by_cap,
        "per_action": result.ledger.per_action(),
        "wall_time_s": result.wall_time,
        "epochs": len(result.metrics),
    }
    write_text(out / "run.json", json.dumps(summary, indent=2) + "\n")
    print(f"{rid}: total_energy={result.total_energy:.9g} "
          f"({result.wall_time:.2f}s, outputs in {out})")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        base = parse_config_file(args.config)
        axes, repeats = parse_axes_file(args.grid if args.grid else args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    if not axes:
        print("note: no axes given; running the base config once", file=sys.stderr)
    spec = SweepSpec(base, axes, repeats)
    outcomes = sweep(spec, jobs=args.jobs)
    out = _out_dir(args.out)
    write_text(out / "energy_summary.csv", summary_csv(outcomes))
    rows = [(run_id_for(oc.config, oc.index), oc.result)
            for oc in outcomes if oc.result is not None]
    write_text(out / "metrics.csv", metrics_csv(rows))
    failed = [oc for oc in outcomes if oc.result is None]
    for oc in failed:
        print(f"cell {oc.index} ({oc.config.algorithm}): {oc.error}", file=sys.stderr)
    print(f"{len(rows)} cells completed, {len(failed)} failed/skipped; "
          f"outputs in {out}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    e_max = args.e_max if args.e_max is not None else args.kappa + 5
    epsilon = args.epsilon if args.epsilon is not None else analytics.participation_threshold(args.N)
    cfg = ExperimentConfig(
        n_clients=args.N,
        n_groups=args.G if args.G else 1,
        slots_per_epoch=args.S,
        kappa=args.kappa,
        delta=args.delta,
        e_max=e_max,
    )
    bound = analytics.participation_bound(cfg)
    print(f"participation probability by start level (kappa={args.kappa}, "
          f"S={args.S}, delta={args.delta}):")
    for m, p in enumerate(bound.p_of_m):
        print(f"  m={m:3d}  p={p:.9g}")
    print(f"uniform lower bound p(0) = {bound.uniform_lower:.9g}")
    print(f"required threshold 1/(6*sqrt(N)) = {bound.theorem_threshold:.9g} "
          f"(N={args.N}{', G=' + str(args.G) if args.G else ''})")
    verdict = "satisfied" if bound.threshold_met else "violated"
    print(f"convergence participation condition: {verdict}")
    if args.delta > 0:
        boundary = analytics.minimal_epoch_slots(args.kappa, args.delta,
                                                 analytics.participation_threshold(args.N))
        print(f"theoretical boundary: smallest S meeting the condition = {boundary}")
        minimal = analytics.minimal_epoch_slots(args.kappa, args.delta, epsilon)
        print(f"minimal S with uniform bound >= {epsilon:.9g}: {minimal}")
    else:
        print("delta = 0: no epoch length achieves a positive participation bound")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "sweep":
        return cmd_sweep(args)
    return cmd_analyze(args)


if __name__ == "__main__":
    sys.exit(main())
