"""Slot / epoch / group clock arithmetic.

Time advances in unit slots.  An epoch is ``S`` consecutive slots; within an
epoch the first ``G * R`` slots are split into ``G`` group rounds of
``R = S // G`` slots each.  The last slot of each group round is that group's
upload slot.  When ``G`` does not divide ``S``, the trailing ``S - G * R``
slots of every epoch belong to no group round: charging and running training
sessions continue there, but no uploads or aggregations take place.
"""
from __future__ import annotations

from dataclasses import dataclass

from .config import ExperimentConfig


@dataclass(frozen=True)
class SlotClock:
    slot: int            # global slot index
    epoch: int           # slot // S
    group: int           # active group, clamped to G - 1 in dead slots
    in_epoch: int        # slot % S
    is_group_final: bool  # True on a group's upload slot


def clock_decompose(slot: int, cfg: ExperimentConfig) -> SlotClock:
    """Split a global slot index into epoch / group coordinates."""
    if slot < 0:
        raise ValueError(f"slot must be >= 0, got {slot}")
    s_len = cfg.slots_per_epoch
    r_len = cfg.group_round_len
    epoch, r = divmod(slot, s_len)
    group = min(r // r_len, cfg.n_groups - 1)
    final = r < cfg.n_groups * r_len and r % r_len == r_len - 1
    return SlotClock(slot, epoch, group, r, final)
