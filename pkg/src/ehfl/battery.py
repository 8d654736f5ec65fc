"""Energy-harvesting battery process and the system-wide energy ledger.

Battery levels live in [0, E_max].  Each slot a client harvests one unit with
probability delta; within a slot the charge is credited before the client
decides on an action (so a unit arriving this slot can fund this slot's
action), while the level update folds consumption and charge together with
the capacity clamp applied last:

    idle       E' = min(E + c, E_max)
    training   E' = min(max(E - 1, 0) + c, E_max)       (one slot of a session)
    transmit   E' = min(E - cost + c, E_max)

A charge arriving at a full battery during an idle slot is wasted; the ledger
tracks harvested, consumed, and wasted units so the conservation identity

    harvested == consumed + sum(current batteries) + wasted

holds exactly at every slot boundary (to float rounding when costs are
fractional).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InsufficientEnergyError(ValueError):
    """An action costs more than the battery holds; callers treat it as declined."""


def charge_draw(gen: np.random.Generator, delta: float) -> bool:
    """One Bernoulli(delta) charging event."""
    if delta >= 1.0:
        return True
    if delta <= 0.0:
        return False
    return gen.random() < delta


def apply_idle(level: float, charged: bool, e_max: float) -> float:
    """Battery after an idle slot."""
    return min(level + (1.0 if charged else 0.0), e_max)


def apply_training_slot(level: float, charged: bool, e_max: float) -> float:
    """Battery after one slot of a running training session."""
    return min(max(level - 1.0, 0.0) + (1.0 if charged else 0.0), e_max)


def apply_transmit(level: float, charged: bool, e_max: float, cost: float = 1.0) -> float:
    """Battery after transmitting; the same-slot charge may fund the cost.

    Raises InsufficientEnergyError when even the credited charge cannot cover
    the cost; callers decline the action rather than crash.
    """
    funds = level + (1.0 if charged else 0.0)
    if funds < cost:
        raise InsufficientEnergyError(
            f"transmit cost {cost} exceeds available energy {funds}"
        )
    return min(level - cost + (1.0 if charged else 0.0), e_max)


@dataclass
class EnergyLedger:
    """System-wide energy accounting, in battery units."""

    harvested_total: float = 0.0
    wasted_by_cap: float = 0.0
    training: float = 0.0
    member_uplink: float = 0.0
    hub_relay: float = 0.0

    @property
    def consumed_total(self) -> float:
        return self.training + self.member_uplink + self.hub_relay

    def per_action(self) -> dict[str, float]:
        return {
            "training": self.training,
            "member_uplink": self.member_uplink,
            "hub_relay": self.hub_relay,
        }

    def conservation_gap(self, batteries_sum: float) -> float:
        """harvested - consumed - stored - wasted; zero when books balance."""
        return self.harvested_total - self.consumed_total - batteries_sum - self.wasted_by_cap
