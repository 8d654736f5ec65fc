"""Experiment configuration, validation, and config-file parsing.

Config files are flat INI text: a ``[run]`` section with the protocol
constants, an ``[objective]`` section, and (for sweeps) optional ``[axes]``
and ``[sweep]`` sections.  Keys in ``[run]`` use the conventional short names
(N, G, S, T, kappa, delta, E_max, gamma, B, sigma).
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import analytics
from .objectives import ObjectiveSpec, smoothness_of

ALGORITHMS = ("fedbacys", "fedbacys-odd", "fedavg", "cycp-sgd", "mifa", "fedseq", "flda")

# Algorithms with no grouping policy; G never enters their schedule.
UNGROUPED_ALGORITHMS = ("fedavg", "mifa", "flda")


class ConfigError(ValueError):
    """Raised when a configuration fails a hard validation check."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("; ".join(report.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    n_clients: int = 100          # N
    n_groups: int = 5             # G
    slots_per_epoch: int = 30     # S
    n_epochs: int = 500           # T
    kappa: int = 20               # battery units = slots per training session
    delta: float = 1.0            # per-slot charging probability
    e_max: int = 25               # battery capacity
    gamma: float = 0.05           # local learning rate
    local_steps: int = 1          # B, gradient steps per training session
    sigma: float = 0.0            # stochastic-gradient noise scale
    seed: int = 0
    algorithm: str = "fedbacys"
    objective: ObjectiveSpec = field(default_factory=ObjectiveSpec)
    hub_relay_cost: float = 0.0   # energy per hub multicast / server upload
    fd_tx_cost: float = 0.1       # energy per distillation-phase uplink (flda)
    odd_first: bool = True        # odd-chance policy fires on its first opportunity

    @property
    def group_round_len(self) -> int:  # R
        return self.slots_per_epoch // self.n_groups

    @property
    def total_slots(self) -> int:
        return self.slots_per_epoch * self.n_epochs


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_config(cfg: ExperimentConfig) -> ValidationReport:
    """Check hard feasibility and soft analysis conditions.

    Hard errors refuse the run; warnings never do.  The learning-rate warning
    needs the objective family's smoothness constant and is skipped with a
    note when that constant is not analytically known.
    """
    errors: list[str] = []
    warnings: list[str] = []

    if cfg.n_clients < 1:
        errors.append(f"N must be >= 1, got {cfg.n_clients}")
    if cfg.n_groups < 1:
        errors.append(f"G must be >= 1, got {cfg.n_groups}")
    elif cfg.n_groups > cfg.n_clients:
        errors.append(f"G={cfg.n_groups} exceeds N={cfg.n_clients}")
    if cfg.kappa < 1:
        errors.append(f"kappa must be >= 1, got {cfg.kappa}")
    if cfg.slots_per_epoch < cfg.kappa:
        errors.append(f"S={cfg.slots_per_epoch} is below kappa={cfg.kappa}")
    if cfg.n_groups >= 1 and cfg.slots_per_epoch >= 1 and cfg.group_round_len < 1:
        errors.append(f"group round length S//G = 0 for S={cfg.slots_per_epoch}, G={cfg.n_groups}")
    if not 0.0 <= cfg.delta <= 1.0:
        errors.append(f"delta must be in [0, 1], got {cfg.delta}")
    if cfg.n_epochs < 0:
        errors.append(f"T must be >= 0, got {cfg.n_epochs}")
    if cfg.e_max < 1:
        errors.append(f"E_max must be >= 1, got {cfg.e_max}")
    if cfg.gamma <= 0.0:
        errors.append(f"gamma must be > 0, got {cfg.gamma}")
    if cfg.local_steps < 1:
        errors.append(f"B must be >= 1, got {cfg.local_steps}")
    if cfg.sigma < 0.0:
        errors.append(f"sigma must be >= 0, got {cfg.sigma}")
    if cfg.seed < 0:
        errors.append(f"seed must be >= 0, got {cfg.seed}")
    if cfg.algorithm not in ALGORITHMS:
        errors.append(f"unknown algorithm {cfg.algorithm!r}; expected one of {ALGORITHMS}")
    if not 0.0 < cfg.fd_tx_cost <= 1.0:
        errors.append(f"fd_tx_cost must be in (0, 1], got {cfg.fd_tx_cost}")
    if cfg.hub_relay_cost < 0.0:
        errors.append(f"hub_relay_cost must be >= 0, got {cfg.hub_relay_cost}")

    if errors:
        return ValidationReport(tuple(errors), tuple(warnings))

    if cfg.e_max < cfg.kappa:
        warnings.append(
            f"E_max={cfg.e_max} below kappa={cfg.kappa}: a full battery cannot fund a session"
        )
    if cfg.delta > 0 and not analytics.meets_participation_threshold(
            cfg.n_clients, cfg.kappa, cfg.slots_per_epoch, cfg.delta):
        lower = analytics.binom_tail(cfg.kappa, cfg.slots_per_epoch, cfg.delta)
        warnings.append(
            "participation lower bound %.6g is below the convergence threshold %.6g"
            % (lower, analytics.participation_threshold(cfg.n_clients))
        )
    smoothness = smoothness_of(cfg.objective)
    if smoothness is None:
        warnings.append(
            f"learning-rate check skipped: no analytic smoothness constant for "
            f"{cfg.objective.kind!r} objectives"
        )
    else:
        limit = 1.0 / (12.0 * cfg.local_steps * smoothness * cfg.n_clients)
        if cfg.gamma > limit:
            warnings.append(
                "gamma=%.6g exceeds the convergence-safe rate %.6g" % (cfg.gamma, limit)
            )
    return ValidationReport(tuple(errors), tuple(warnings))


_RUN_KEYS = {
    "N": ("n_clients", int),
    "G": ("n_groups", int),
    "S": ("slots_per_epoch", int),
    "T": ("n_epochs", int),
    "kappa": ("kappa", int),
    "delta": ("delta", float),
    "E_max": ("e_max", int),
    "gamma": ("gamma", float),
    "B": ("local_steps", int),
    "sigma": ("sigma", float),
    "seed": ("seed", int),
    "algorithm": ("algorithm", str),
    "hub_relay_cost": ("hub_relay_cost", float),
    "fd_tx_cost": ("fd_tx_cost", float),
    "odd_first": ("odd_first", None),  # parsed as bool
}

_OBJECTIVE_KEYS = {
    "kind": ("kind", str),
    "dim": ("dim", int),
    "curvature": ("curvature", float),
    "spread": ("spread", float),
    "offset": ("offset", float),
    "n_samples": ("n_samples", int),
    "label_skew": ("label_skew", float),
}

# Sweep axis names map onto config fields.
AXIS_FIELDS = {
    "algorithm": ("algorithm", str),
    "G": ("n_groups", int),
    "delta": ("delta", float),
    "kappa": ("kappa", int),
    "S": ("slots_per_epoch", int),
    "T": ("n_epochs", int),
    "gamma": ("gamma", float),
    "B": ("local_steps", int),
    "sigma": ("sigma", float),
}


def _parser(path: str | Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(path)
    return parser


def parse_config_file(path: str | Path) -> ExperimentConfig:
    """Load an ExperimentConfig from an INI file."""
    parser = _parser(path)
    cfg = ExperimentConfig()
    if parser.has_section("run"):
        fields = {}
        for key, raw in parser.items("run"):
            canonical = _match_key(key, _RUN_KEYS)
            name, cast = _RUN_KEYS[canonical]
            if canonical == "odd_first":
                fields[name] = parser.getboolean("run", key)
            else:
                fields[name] = cast(raw)
        cfg = replace(cfg, **fields)
    if parser.has_section("objective"):
        fields = {}
        for key, raw in parser.items("objective"):
            if key not in _OBJECTIVE_KEYS:
                raise ConfigError(ValidationReport((f"unknown objective key {key!r}",), ()))
            name, cast = _OBJECTIVE_KEYS[key]
            fields[name] = cast(raw)
        cfg = replace(cfg, objective=replace(cfg.objective, **fields))
    return cfg


def _match_key(key: str, table: dict) -> str:
    # configparser lower-cases keys; match case-insensitively.
    for canonical in table:
        if canonical.lower() == key.lower():
            return canonical
    raise ConfigError(ValidationReport((f"unknown run key {key!r}",), ()))


def parse_axes_file(path: str | Path) -> tuple[dict[str, list], int]:
    """Load sweep axes (name -> value list) and the repeat count."""
    parser = _parser(path)
    axes: dict[str, list] = {}
    if parser.has_section("axes"):
        for key, raw in parser.items("axes"):
            canonical = _match_key(key, AXIS_FIELDS)
            _, cast = AXIS_FIELDS[canonical]
            axes[canonical] = [cast(v.strip()) for v in raw.split(",") if v.strip()]
    repeats = 1
    if parser.has_section("sweep") and parser.has_option("sweep", "repeats"):
        repeats = parser.getint("sweep", "repeats")
    return axes, repeats
