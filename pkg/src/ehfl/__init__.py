"""Deterministic slot-level simulator and analytics for battery-aware
energy-harvesting federated learning."""

from .analytics import (ParticipationBound, binom_tail, empirical_participation,
                        meets_participation_threshold, minimal_epoch_slots,
                        participation_bound, participation_prob,
                        participation_threshold)
from .battery import EnergyLedger, InsufficientEnergyError
from .clock import SlotClock, clock_decompose
from .config import (ALGORITHMS, ConfigError, ExperimentConfig,
                     ValidationReport, parse_config_file, validate_config)
from .engine import AggregationEvent, ClientState, MetricsRecord
from .harness import RunResult, SweepSpec, run, sweep
from .objectives import DivergenceError, ObjectiveSpec, build_objective

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "AggregationEvent",
    "ClientState",
    "ConfigError",
    "DivergenceError",
    "EnergyLedger",
    "ExperimentConfig",
    "InsufficientEnergyError",
    "MetricsRecord",
    "ObjectiveSpec",
    "ParticipationBound",
    "RunResult",
    "SlotClock",
    "SweepSpec",
    "ValidationReport",
    "binom_tail",
    "build_objective",
    "clock_decompose",
    "empirical_participation",
    "meets_participation_threshold",
    "minimal_epoch_slots",
    "participation_bound",
    "participation_prob",
    "participation_threshold",
    "parse_config_file",
    "run",
    "sweep",
    "validate_config",
]
