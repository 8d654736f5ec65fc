"""Clock decomposition: epoch / group / upload-slot arithmetic."""
from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ehfl import ExperimentConfig, clock_decompose


def cfg_for(s: int, g: int) -> ExperimentConfig:
    return ExperimentConfig(n_clients=max(g, 3), n_groups=g, slots_per_epoch=s,
                            kappa=1, n_epochs=10)


def test_group_final_at_epoch_end():
    c = clock_decompose(29, cfg_for(30, 3))
    assert (c.epoch, c.group, c.is_group_final) == (0, 2, True)


def test_epoch_rollover():
    c = clock_decompose(30, cfg_for(30, 3))
    assert (c.epoch, c.group, c.is_group_final) == (1, 0, False)


def test_first_group_final():
    c = clock_decompose(9, cfg_for(30, 3))
    assert (c.epoch, c.group, c.is_group_final) == (0, 0, True)


def test_negative_slot_rejected():
    with pytest.raises(ValueError):
        clock_decompose(-1, cfg_for(30, 3))


def test_dead_slots_have_no_upload_window():
    # S=10, G=3 -> R=3; slot 9 of each epoch is outside every group round.
    cfg = cfg_for(10, 3)
    c = clock_decompose(9, cfg)
    assert c.group == 2 and not c.is_group_final
    assert clock_decompose(8, cfg).is_group_final


@settings(max_examples=200)
@given(s=st.integers(0, 10_000), s_len=st.integers(1, 40), g=st.integers(1, 8))
def test_epoch_shift_preserves_group_phase(s, s_len, g):
    g = min(g, s_len)
    cfg = cfg_for(s_len, g)
    a = clock_decompose(s, cfg)
    b = clock_decompose(s + s_len, cfg)
    assert b.epoch == a.epoch + 1
    assert b.group == a.group
    assert b.is_group_final == a.is_group_final


@given(s_len=st.integers(1, 40), g=st.integers(1, 8))
def test_group_indices_partition_upload_region(s_len, g):
    g = min(g, s_len)
    cfg = cfg_for(s_len, g)
    r = cfg.group_round_len
    counts = [0] * g
    for s in range(g * r):
        counts[clock_decompose(s, cfg).group] += 1
    assert counts == [r] * g
