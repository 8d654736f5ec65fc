"""Shared slot-level simulation core for every scheduling policy.

The engine advances one slot at a time.  Within a slot each client, in
ascending id order, draws its charging event, sees its post-charge level for
decisions, and performs at most one energy-consuming action: continue or
start a training session (one unit per slot, uninterruptible for ``kappa``
slots) or transmit a pending update (one unit, or the policy's cost).
Cross-client effects - aggregations, multicasts, broadcasts - are applied
only at slot boundaries, so the observable behaviour is that of a
single-threaded scheduler.

Policies are subclasses overriding the decision hooks; the battery process,
session mechanics, energy ledger, and per-epoch metrics live here.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng as streams
from .battery import EnergyLedger
from .config import ExperimentConfig
from .objectives import Objective, local_train


@dataclass(slots=True)
class ClientState:
    """One client's protocol state."""

    id: int
    group: int = 0
    battery: float = 0.0
    busy_remaining: int = 0                    # slots left in the running session
    pending: np.ndarray | None = None          # computed update awaiting uplink
    pending_snapshot: np.ndarray | None = None  # model the pending update was trained on
    chance_counter: int = 0                    # odd-chance opportunity count
    last_chance_window: int = -1               # window instance already counted
    reference_model: np.ndarray | None = None  # latest model received
    training_snapshot: np.ndarray | None = None  # model fixed at session start


@dataclass(frozen=True)
class MetricsRecord:
    """Per-epoch observables."""

    epoch: int
    global_loss: float
    dist_to_opt: float | None
    cum_energy: float
    trainings_launched: int
    updates_uploaded: int
    participants: int


@dataclass(frozen=True)
class UploadRecord:
    client_id: int
    delta: np.ndarray
    snapshot: np.ndarray


@dataclass(frozen=True)
class AggregationEvent:
    """One aggregation step, recorded when event capture is on."""

    slot: int
    epoch: int
    label: str
    model_before: np.ndarray
    model_after: np.ndarray
    uploads: tuple[UploadRecord, ...]


@dataclass
class StrictLog:
    """Trajectory details collected when strict checking is enabled."""

    actions: list[tuple[int, int, str]] = field(default_factory=list)  # slot, client, kind
    sessions: list[tuple[int, int, int]] = field(default_factory=list)  # client, start, end


class SlotEngine:
    """Battery/session mechanics plus policy hooks."""

    def __init__(self, cfg: ExperimentConfig, objective: Objective,
                 record_events: bool = False, strict_checks: bool = False):
        self.cfg = cfg
        self.objective = objective
        self.record_events = record_events
        self.strict = strict_checks
        dim = objective.dim
        self.model = np.zeros(dim)
        self.clients = [
            ClientState(id=i, reference_model=self.model) for i in range(cfg.n_clients)
        ]
        self.ledger = EnergyLedger()
        self.metrics: list[MetricsRecord] = []
        self.events: list[AggregationEvent] = []
        self.current_slot = -1
        self._optimum = objective.global_optimum()
        self._noise = [streams.stream(cfg.seed, streams.NOISE, i) for i in range(cfg.n_clients)]
        self._grouping = streams.stream(cfg.seed, streams.GROUPING)
        self._charge_rows = self._draw_charge_plan()
        self._uploads: list[UploadRecord] = []
        self._epoch_launches = 0
        self._epoch_uploads = 0
        self._epoch_participants: set[int] = set()
        self._session_start: dict[int, int] = {}
        self.strict_log = StrictLog() if strict_checks else None

    def _draw_charge_plan(self) -> list[list[bool]]:
        cfg = self.cfg
        total = cfg.total_slots
        rows = []
        for i in range(cfg.n_clients):
            gen = streams.stream(cfg.seed, streams.CHARGING, i)
            if cfg.delta >= 1.0:
                rows.append([True] * total)
            elif cfg.delta <= 0.0:
                rows.append([False] * total)
            else:
                rows.append((gen.random(total) < cfg.delta).tolist())
        return rows

    # ---- policy hooks -------------------------------------------------

    def begin_epoch(self, t: int) -> None:
        pass

    def begin_slot(self, s: int) -> None:
        pass

    def end_slot(self, s: int, uploads: list[UploadRecord]) -> None:
        pass

    def wants_transmit(self, cl: ClientState, s: int) -> bool:
        """Whether a free client holding an update should upload this slot."""
        return False

    def wants_launch(self, cl: ClientState, s: int, level: float) -> bool:
        """Whether a free client should start a training session this slot."""
        return False

    def transmit_cost(self, s: int) -> float:
        return 1.0

    # ---- core loop -----------------------------------------------------

    def run(self) -> None:
        cfg = self.cfg
        s_len = cfg.slots_per_epoch
        e_max = float(cfg.e_max)
        kappa = cfg.kappa
        clients = self.clients
        rows = self._charge_rows
        strict = self.strict
        harvested = 0.0
        wasted = 0.0
        training_units = 0.0
        uplink_units = 0.0
        uploads = self._uploads

        for s in range(cfg.total_slots):
            self.current_slot = s
            if s % s_len == 0:
                self.begin_epoch(s // s_len)
            self.begin_slot(s)
            uploads.clear()
            for cl in clients:
                charged = rows[cl.id][s]
                e_pre = cl.battery
                level = e_pre + 1.0 if charged else e_pre
                if level > e_max:
                    level = e_max
                if charged:
                    harvested += 1.0
                if cl.busy_remaining > 0:
                    # One slot of a running session: consume, then charge, then
                    # clamp.  The launch gate (post-charge level >= kappa) keeps
                    # e_pre + charge at or above the remaining session length,
                    # so the result never goes negative.
                    v = e_pre - 1.0 + (1.0 if charged else 0.0)
                    cl.battery = v if v <= e_max else e_max
                    training_units += 1.0
                    cl.busy_remaining -= 1
                    if strict:
                        self.strict_log.actions.append((s, cl.id, "train"))
                    if cl.busy_remaining == 0:
                        self._complete_session(cl, s)
                    continue
                acted = False
                if cl.pending is not None and self.wants_transmit(cl, s):
                    cost = self.transmit_cost(s)
                    if level >= cost:
                        v = e_pre - cost + (1.0 if charged else 0.0)
                        if v > e_max:
                            wasted += v - e_max
                            v = e_max
                        cl.battery = v
                        uplink_units += cost
                        uploads.append(UploadRecord(cl.id, cl.pending, cl.pending_snapshot))
                        cl.pending = None
                        cl.pending_snapshot = None
                        self._epoch_uploads += 1
                        self._epoch_participants.add(cl.id)
                        acted = True
                        if strict:
                            self.strict_log.actions.append((s, cl.id, "transmit"))
                    # insufficient energy: the upload is declined, client idles
                elif self.wants_launch(cl, s, level):
                    cl.training_snapshot = cl.reference_model
                    cl.busy_remaining = kappa - 1
                    v = e_pre - 1.0 + (1.0 if charged else 0.0)
                    cl.battery = v if v <= e_max else e_max
                    training_units += 1.0
                    self._epoch_launches += 1
                    acted = True
                    if strict:
                        self.strict_log.actions.append((s, cl.id, "train"))
                        self._session_start[cl.id] = s
                    if cl.busy_remaining == 0:
                        self._complete_session(cl, s)
                if not acted:
                    if charged and e_pre + 1.0 > e_max:
                        wasted += e_pre + 1.0 - e_max
                    cl.battery = level
            self.end_slot(s, uploads)
            if strict:
                self._flush_ledger(harvested, wasted, training_units, uplink_units)
                self._strict_slot_checks(s)
            if (s + 1) % s_len == 0:
                self._flush_ledger(harvested, wasted, training_units, uplink_units)
                self._record_epoch(s // s_len)
        self._flush_ledger(harvested, wasted, training_units, uplink_units)
        self._check_conservation()

    # ---- internals -----------------------------------------------------

    def _complete_session(self, cl: ClientState, s: int) -> None:
        cfg = self.cfg
        cl.pending = local_train(
            self.objective, cl.id, cl.training_snapshot, cfg.gamma, cfg.local_steps,
            self._noise[cl.id],
        )
        cl.pending_snapshot = cl.training_snapshot
        if self.strict and cl.id in self._session_start:
            self.strict_log.sessions.append((cl.id, self._session_start.pop(cl.id), s))

    def _flush_ledger(self, harvested: float, wasted: float,
                      training_units: float, uplink_units: float) -> None:
        led = self.ledger
        led.harvested_total = harvested
        led.wasted_by_cap = wasted
        led.training = training_units
        led.member_uplink = uplink_units

    def _record_epoch(self, t: int) -> None:
        loss = self.objective.global_loss(self.model)
        dist = None
        if self._optimum is not None:
            dist = float(np.linalg.norm(self.model - self._optimum))
        self.metrics.append(MetricsRecord(
            epoch=t,
            global_loss=loss,
            dist_to_opt=dist,
            cum_energy=self.ledger.consumed_total,
            trainings_launched=self._epoch_launches,
            updates_uploaded=self._epoch_uploads,
            participants=len(self._epoch_participants),
        ))
        self._epoch_launches = 0
        self._epoch_uploads = 0
        self._epoch_participants.clear()

    def _strict_slot_checks(self, s: int) -> None:
        e_max = float(self.cfg.e_max)
        for cl in self.clients:
            if not 0.0 <= cl.battery <= e_max:
                raise RuntimeError(
                    f"battery bound violated at slot {s}: client {cl.id} at {cl.battery}"
                )
        gap = self.ledger.conservation_gap(sum(cl.battery for cl in self.clients))
        if abs(gap) > self._conservation_tolerance():
            raise RuntimeError(f"energy conservation violated at slot {s}: gap {gap}")

    def _conservation_tolerance(self) -> float:
        cfg = self.cfg
        integer_costs = cfg.hub_relay_cost == int(cfg.hub_relay_cost) and (
            cfg.algorithm != "flda" or cfg.fd_tx_cost == int(cfg.fd_tx_cost)
        )
        if integer_costs:
            return 0.0
        return 1e-6 * (1.0 + self.ledger.harvested_total)

    def _check_conservation(self) -> None:
        gap = self.ledger.conservation_gap(sum(cl.battery for cl in self.clients))
        if abs(gap) > self._conservation_tolerance():
            raise RuntimeError(f"energy conservation violated at end of run: gap {gap}")

    def _record_aggregation(self, s: int, label: str, before: np.ndarray,
                            uploads: list[UploadRecord]) -> None:
        if self.record_events:
            self.events.append(AggregationEvent(
                slot=s,
                epoch=s // self.cfg.slots_per_epoch,
                label=label,
                model_before=before,
                model_after=self.model,
                uploads=tuple(uploads),
            ))

    def _apply_uploads(self, uploads: list[UploadRecord]) -> None:
        """Fold 1/N-weighted updates into the model, ascending client id."""
        if not uploads:
            return
        total = np.zeros(self.objective.dim)
        for rec in uploads:
            total += rec.delta
        self.model = self.model + total / self.cfg.n_clients
