"""Experiment runner, sweep grids, and CSV emission.

CSV schemas (version 1, floats printed with 9 significant digits):

  metrics.csv         run_id, algorithm, N, G, S, T, kappa, delta, seed,
                      epoch, global_loss, dist_to_opt, cum_energy,
                      participants, trainings_launched
  energy_summary.csv  algorithm, G, delta, kappa, S, seed, total_energy,
                      final_loss, final_dist_to_opt

Algorithms without a grouping policy leave the G column empty in the summary
and occupy a single cell per remaining axis combination.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from pathlib import Path

from . import rng as streams
from .baselines import ENGINES
from .battery import EnergyLedger
from .config import (AXIS_FIELDS, UNGROUPED_ALGORITHMS, ConfigError,
                     ExperimentConfig, validate_config)
from .engine import AggregationEvent, MetricsRecord
from .objectives import DivergenceError, build_objective

CSV_SCHEMA_VERSION = 1

METRICS_COLUMNS = (
    "run_id", "algorithm", "N", "G", "S", "T", "kappa", "delta", "seed",
    "epoch", "global_loss", "dist_to_opt", "cum_energy", "participants",
    "trainings_launched",
)

SUMMARY_COLUMNS = (
    "algorithm", "G", "delta", "kappa", "S", "seed", "total_energy",
    "final_loss", "final_dist_to_opt",
)


@dataclass
class RunResult:
    config: ExperimentConfig
    metrics: list[MetricsRecord]
    ledger: EnergyLedger
    wall_time: float
    events: list[AggregationEvent] = field(default_factory=list)

    @property
    def total_energy(self) -> float:
        return self.ledger.consumed_total


def run(cfg: ExperimentConfig, record_events: bool = False,
        strict_checks: bool = False) -> RunResult:
    """Execute one seeded simulation of S*T slots."""
    report = validate_config(cfg)
    if not report.ok:
        raise ConfigError(report)
    objective = build_objective(cfg.objective, cfg.n_clients, cfg.sigma, cfg.seed)
    engine_cls = ENGINES[cfg.algorithm]
    engine = engine_cls(cfg, objective, record_events=record_events,
                        strict_checks=strict_checks)
    started = time.perf_counter()
    try:
        engine.run()
    except DivergenceError as err:
        err.epoch = max(engine.current_slot, 0) // cfg.slots_per_epoch
        raise
    elapsed = time.perf_counter() - started
    return RunResult(cfg, engine.metrics, engine.ledger, elapsed, engine.events)


@dataclass(frozen=True)
class SweepSpec:
    """Grid of configs: a base plus named axis value lists and seed repeats."""

    base: ExperimentConfig
    axes: dict[str, list]
    repeats: int = 1

    def cells(self) -> list[tuple[int, int, ExperimentConfig]]:
        """Expand to (cell_index, repeat, config) triples.

        Axes apply in declaration order.  For algorithms without grouping the
        G axis is collapsed onto its first value so each such algorithm yields
        one cell per remaining combination.
        """
        names = list(self.axes)
        value_lists = [self.axes[name] for name in names]
        cells = []
        index = 0
        for combo in product(*value_lists) if names else [()]:
            fields = {}
            for name, value in zip(names, combo):
                fields[AXIS_FIELDS[name][0]] = value
            cfg = replace(self.base, **fields)
            if "G" in names and cfg.algorithm in UNGROUPED_ALGORITHMS:
                if combo[names.index("G")] != self.axes["G"][0]:
                    continue  # grouping is ignored; run the first G cell only
            for repeat in range(self.repeats):
                seed = streams.derive_seed(self.base.seed, index, repeat)
                cells.append((index, repeat, replace(cfg, seed=seed)))
                index += 1
        return cells


@dataclass
class CellOutcome:
    index: int
    repeat: int
    config: ExperimentConfig
    result: RunResult | None
    error: str | None = None


def _run_cell(args: tuple[int, int, ExperimentConfig]) -> CellOutcome:
    index, repeat, cfg = args
    try:
        return CellOutcome(index, repeat, cfg, run(cfg))
    except ConfigError as err:
        return CellOutcome(index, repeat, cfg, None, f"skipped: {err}")
    except DivergenceError as err:
        return CellOutcome(index, repeat, cfg, None, f"diverged at epoch {err.epoch}")


def sweep(spec: SweepSpec, jobs: int = 1) -> list[CellOutcome]:
    """Run every cell; failures are recorded and the sweep continues.

    Cells carry independent derived seeds, so parallel execution (jobs > 1)
    is observationally identical to the sequential order.
    """
    cells = spec.cells()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_cell, cells))
    else:
        outcomes = [_run_cell(cell) for cell in cells]
    outcomes.sort(key=lambda oc: oc.index)
    return outcomes


# ---- CSV emission -------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.9g" % value
    return str(value)


def _summary_group(cfg: ExperimentConfig):
    return None if cfg.algorithm in UNGROUPED_ALGORITHMS else cfg.n_groups


def metrics_csv(results: list[tuple[str, RunResult]]) -> str:
    """Render per-epoch metrics rows for one or more runs."""
    lines = [",".join(METRICS_COLUMNS)]
    for run_id, res in results:
        cfg = res.config
        prefix = (
            run_id, cfg.algorithm, cfg.n_clients, cfg.n_groups, cfg.slots_per_epoch,
            cfg.n_epochs, cfg.kappa, cfg.delta, cfg.seed,
        )
        for rec in res.metrics:
            row = prefix + (
                rec.epoch, rec.global_loss, rec.dist_to_opt, rec.cum_energy,
                rec.participants, rec.trainings_launched,
            )
            lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def summary_csv(outcomes: list[CellOutcome]) -> str:
    """Render the energy summary, one row per completed cell."""
    lines = [",".join(SUMMARY_COLUMNS)]
    for oc in outcomes:
        if oc.result is None:
            continue
        cfg = oc.config
        last = oc.result.metrics[-1] if oc.result.metrics else None
        row = (
            cfg.algorithm, _summary_group(cfg), cfg.delta, cfg.kappa,
            cfg.slots_per_epoch, cfg.seed, oc.result.total_energy,
            last.global_loss if last else None,
            last.dist_to_opt if last else None,
        )
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def run_id_for(cfg: ExperimentConfig, index: int = 0) -> str:
    return f"{cfg.algorithm}-G{cfg.n_groups}-d{_fmt(cfg.delta)}-k{cfg.kappa}" \
           f"-S{cfg.slots_per_epoch}-seed{cfg.seed}-c{index}"


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
