"""Binomial tails and participation probability machinery."""
from __future__ import annotations

import pytest

from ehfl import (ExperimentConfig, binom_tail, empirical_participation,
                  meets_participation_threshold, minimal_epoch_slots,
                  participation_bound, participation_prob,
                  participation_threshold)
from oracles import exact_binom_tail


def test_all_trials_succeeding():
    assert binom_tail(20, 20, 1.0) == 1.0


def test_single_trial():
    assert binom_tail(1, 1, 0.5) == 0.5


def test_tail_edges():
    for n in (0, 1, 7, 33):
        for p in (0.0, 0.2, 1.0):
            assert binom_tail(0, n, p) == 1.0
            assert binom_tail(n + 1, n, p) == 0.0


def test_tail_against_exact_oracle():
    assert binom_tail(20, 30, 0.5) == pytest.approx(exact_binom_tail(20, 30, 0.5), abs=1e-12)


def test_tail_rejects_bad_arguments():
    with pytest.raises(ValueError):
        binom_tail(-1, 10, 0.5)
    with pytest.raises(ValueError):
        binom_tail(12, 10, 0.5)
    with pytest.raises(ValueError):
        binom_tail(2, 10, 1.5)


def test_participation_is_certain_above_training_cost():
    for m in (20, 21, 25):
        assert participation_prob(m, kappa=20, s=30, delta=0.3) == 1.0


def test_participation_two_slot_enumeration():
    # Needs both of two charges: 0.5 * 0.5.
    assert participation_prob(0, kappa=2, s=2, delta=0.5) == pytest.approx(0.25, abs=1e-15)


def test_participation_certain_with_constant_charging():
    assert participation_prob(0, kappa=20, s=30, delta=1.0) == 1.0


def test_participation_monotone_in_start_level_charge_and_window():
    for m in range(0, 10):
        assert participation_prob(m + 1, 10, 20, 0.4) >= participation_prob(m, 10, 20, 0.4)
    for i, delta in enumerate([0.1, 0.3, 0.5, 0.7, 0.9]):
        if i:
            assert participation_prob(2, 10, 20, delta) >= previous
        previous = participation_prob(2, 10, 20, delta)
    for s in range(10, 40):
        assert participation_prob(0, 10, s + 1, 0.4) >= participation_prob(0, 10, s, 0.4)


def test_minimal_slots_with_certain_charging():
    assert minimal_epoch_slots(20, 1.0, 0.99) == 20


def test_minimal_slots_two_case():
    # 1 - 0.5^2 = 0.75 meets the target while a single slot gives only 0.5.
    assert minimal_epoch_slots(1, 0.5, 0.75) == 2


def test_minimal_slots_boundary_against_oracle():
    s = minimal_epoch_slots(20, 0.5, 1.0 / 60.0)
    assert exact_binom_tail(20, s, 0.5) >= 1 / 60
    assert exact_binom_tail(20, s - 1, 0.5) < 1 / 60


def test_minimal_slots_rejects_degenerate_inputs():
    with pytest.raises(ValueError):
        minimal_epoch_slots(5, 0.0, 0.5)
    with pytest.raises(ValueError):
        minimal_epoch_slots(5, 0.5, 1.0)


def test_threshold_evaluation():
    assert participation_threshold(100) == pytest.approx(1 / 60)
    assert meets_participation_threshold(100, 20, 30, 1.0)
    assert not meets_participation_threshold(100, 20, 20, 0.1)


def test_threshold_flag_agrees_with_exact_oracle():
    for delta in (0.5, 0.6, 0.7):
        expected = exact_binom_tail(20, 30, delta) >= 1 / 60
        assert meets_participation_threshold(100, 20, 30, delta) == expected


def test_participation_bound_table():
    cfg = ExperimentConfig(n_clients=100, n_groups=5, slots_per_epoch=30,
                           kappa=20, delta=0.5, e_max=25)
    bound = participation_bound(cfg)
    assert len(bound.p_of_m) == cfg.e_max + 1
    assert bound.uniform_lower == bound.p_of_m[0]
    assert all(b >= a for a, b in zip(bound.p_of_m, bound.p_of_m[1:]))
    assert all(p == 1.0 for p in bound.p_of_m[cfg.kappa:])
    assert bound.theorem_threshold == pytest.approx(1 / 60)


def test_empirical_participation_fractions():
    from ehfl.engine import MetricsRecord

    recs = [MetricsRecord(t, 0.0, None, 0.0, 0, 0, p) for t, p in enumerate([0, 5, 10])]
    fractions, avg = empirical_participation(recs, n_clients=10)
    assert fractions == [0.0, 0.5, 1.0]
    assert avg == pytest.approx(0.5)
    assert empirical_participation([], 10) == ([], 0.0)
