"""Cyclic battery-aware scheduling: the FedBacys protocol engine.

Clients are sliced once into G balanced groups; each epoch is divided into G
group rounds of R = S // G slots.  A free client launches training only when
(1) its post-charge battery covers the whole session, (2) it holds no
not-yet-uploaded update, and (3) the session would finish inside its group's
round strictly before the upload slot - the "cramming" rule that delays
training until the latest start that still meets the deadline.  At a group's
final slot, members holding updates and at least one battery unit upload to
the group hub, which folds them into the traveling global model with weight
1/N and multicasts it to the next group; the last hub hands it to the server,
which reassigns hubs and seeds the first group at the next epoch.

The odd-chance variant additionally numbers each client's training
opportunities (at most one per pre-training window) and launches only on
odd-numbered ones, letting clients bank energy between participations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .engine import ClientState, SlotEngine, UploadRecord
from .objectives import Objective


@dataclass(frozen=True)
class GroupAssignment:
    """Balanced client partition and one hub per group."""

    groups: tuple[tuple[int, ...], ...]
    hubs: tuple[int, ...]


def assign_groups(client_ids: list[int], n_groups: int,
                  gen: np.random.Generator) -> list[list[int]]:
    """Uniformly random balanced partition; sizes differ by at most one."""
    if n_groups > len(client_ids):
        raise ValueError(f"cannot split {len(client_ids)} clients into {n_groups} groups")
    order = list(client_ids)
    perm = gen.permutation(len(order))
    shuffled = [order[j] for j in perm]
    base, extra = divmod(len(order), n_groups)
    groups = []
    at = 0
    for g in range(n_groups):
        size = base + (1 if g < extra else 0)
        groups.append(shuffled[at:at + size])
        at += size
    return groups


def pick_hubs(groups: list[list[int]], gen: np.random.Generator) -> list[int]:
    """One uniformly random hub per group."""
    return [group[int(gen.integers(len(group)))] for group in groups]


def in_training_window(group: int, s: int, cfg: ExperimentConfig) -> bool:
    """Deadline-observance check: the session must end inside the group round.

    A session launched at slot s frees the client at s + kappa; that landing
    slot must fall in [g*R, (g+1)*R - 1) of some epoch, keeping the upload
    slot itself clear.
    """
    r_len = cfg.group_round_len
    landing = (s + cfg.kappa) % cfg.slots_per_epoch
    lo = group * r_len
    return lo <= landing < lo + r_len - 1


def may_start_training(client: ClientState, s: int, cfg: ExperimentConfig,
                       level: float | None = None) -> bool:
    """Launch conditions for a plain (non-odd) cyclic client."""
    if level is None:
        level = client.battery
    return (
        client.busy_remaining == 0
        and client.pending is None
        and level >= cfg.kappa
        and in_training_window(client.group, s, cfg)
    )


def window_instance(s: int, cfg: ExperimentConfig) -> int:
    """Identifier of the pre-training window containing launch slot s.

    Within one window the landing slot s + kappa stays inside a single epoch,
    so the landing epoch indexes window instances even when a window straddles
    an epoch boundary.
    """
    return (s + cfg.kappa) // cfg.slots_per_epoch


class FedbacysEngine(SlotEngine):
    """Cyclic group scheduling with hub relay; optionally odd-chance gated."""

    odd_policy = False

    def __init__(self, cfg: ExperimentConfig, objective: Objective, **kwargs):
        super().__init__(cfg, objective, **kwargs)
        ids = list(range(cfg.n_clients))
        self.groups = assign_groups(ids, cfg.n_groups, self._grouping)
        self.hubs = pick_hubs(self.groups, self._grouping)
        for g, members in enumerate(self.groups):
            for cid in members:
                self.clients[cid].group = g
        self._server_model = self.model  # what the server last received

    @property
    def assignment(self) -> GroupAssignment:
        return GroupAssignment(tuple(map(tuple, self.groups)), tuple(self.hubs))

    def begin_epoch(self, t: int) -> None:
        if t == 0:
            return
        # Server rotates hubs and hands its latest model to the first group.
        self.hubs = pick_hubs(self.groups, self._grouping)
        for cid in self.groups[0]:
            self.clients[cid].reference_model = self._server_model

    def wants_transmit(self, cl: ClientState, s: int) -> bool:
        r_len = self.cfg.group_round_len
        return s % self.cfg.slots_per_epoch == (cl.group + 1) * r_len - 1

    def wants_launch(self, cl: ClientState, s: int, level: float) -> bool:
        cfg = self.cfg
        if (cl.pending is not None or level < cfg.kappa
                or not in_training_window(cl.group, s, cfg)):
            return False
        if not self.odd_policy:
            return True
        w = window_instance(s, cfg)
        if cl.last_chance_window == w:
            return False  # this window's opportunity was already taken or skipped
        cl.last_chance_window = w
        cl.chance_counter += 1
        opportunity_is_odd = cl.chance_counter % 2 == 1
        return opportunity_is_odd if cfg.odd_first else not opportunity_is_odd

    def end_slot(self, s: int, uploads: list[UploadRecord]) -> None:
        cfg = self.cfg
        r = s % cfg.slots_per_epoch
        r_len = cfg.group_round_len
        if r >= cfg.n_groups * r_len or r % r_len != r_len - 1:
            return
        g = r // r_len
        before = self.model
        self._apply_uploads(uploads)
        self._record_aggregation(s, f"group-{g}", before, uploads)
        # Relaying is a transmission: a hub that is mid-session or cannot
        # afford the cost declines, and the receivers keep their previous
        # reference (stale but consistent).
        hub = self.clients[self.hubs[g]]
        cost = cfg.hub_relay_cost
        if hub.busy_remaining > 0 or hub.battery < cost:
            return
        if cost > 0.0:
            hub.battery -= cost
            self.ledger.hub_relay += cost
        if g < cfg.n_groups - 1:
            for cid in self.groups[g + 1]:
                self.clients[cid].reference_model = self.model
        else:
            # The last hub uploads to the server; the refreshed model reaches
            # group 0 at the next epoch boundary.
            self._server_model = self.model


class FedbacysOddEngine(FedbacysEngine):
    odd_policy = True
