"""Property-based checks across the analytics and protocol machinery."""
from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from ehfl import ExperimentConfig, binom_tail, participation_prob, run
from ehfl.battery import apply_idle, apply_training_slot, apply_transmit
from ehfl.fedbacys import assign_groups
from ehfl.objectives import ObjectiveSpec
from ehfl.rng import GROUPING, stream
from oracles import exact_binom_tails

probabilities = st.floats(0.0, 1.0, allow_nan=False)


@settings(max_examples=150, deadline=None)
@given(n=st.integers(0, 80), p=probabilities, data=st.data())
def test_binom_tail_matches_exact_oracle(n, p, data):
    k = data.draw(st.integers(0, n + 1))
    exact = exact_binom_tails(n, p)[k]
    assert abs(binom_tail(k, n, p) - exact) <= 1e-12


@settings(max_examples=80, deadline=None)
@given(kappa=st.integers(1, 12), s=st.integers(1, 40), delta=st.floats(0.01, 1.0),
       m=st.integers(0, 14))
def test_participation_monotone(kappa, s, delta, m):
    p = participation_prob(m, kappa, s, delta)
    assert 0.0 <= p <= 1.0
    assert participation_prob(m + 1, kappa, s, delta) >= p
    assert participation_prob(m, kappa, s + 1, delta) >= p
    assert participation_prob(m, kappa, s, min(1.0, delta + 0.05)) >= p - 1e-15
    if m >= kappa:
        assert p == 1.0


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 40), g=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_group_slicing_is_balanced_partition(n, g, seed):
    g = min(g, n)
    groups = assign_groups(list(range(n)), g, stream(seed, GROUPING))
    sizes = [len(x) for x in groups]
    assert max(sizes) - min(sizes) <= 1
    assert sorted(sum(groups, [])) == list(range(n))


@settings(max_examples=200, deadline=None)
@given(level=st.floats(0, 30), charged=st.booleans(), e_max=st.floats(1, 30))
def test_battery_ops_respect_bounds(level, charged, e_max):
    level = min(level, e_max)
    assert 0.0 <= apply_idle(level, charged, e_max) <= e_max
    assert 0.0 <= apply_training_slot(level, charged, e_max) <= e_max
    if level + charged >= 1.0:
        assert 0.0 <= apply_transmit(level, charged, e_max) <= e_max


algorithms = st.sampled_from(
    ["fedbacys", "fedbacys-odd", "fedavg", "cycp-sgd", "mifa", "fedseq", "flda"])


@settings(max_examples=60, deadline=None)
@given(
    alg=algorithms,
    n=st.integers(1, 8),
    g=st.integers(1, 4),
    s_len=st.integers(2, 12),
    kappa=st.integers(1, 5),
    delta=st.sampled_from([0.0, 0.3, 0.7, 1.0]),
    e_max=st.integers(1, 9),
    seed=st.integers(0, 10_000),
)
def test_random_configs_run_clean_under_strict_checks(alg, n, g, s_len, kappa,
                                                      delta, e_max, seed):
    g = min(g, n, s_len)
    kappa = min(kappa, s_len)
    cfg = ExperimentConfig(
        n_clients=n, n_groups=g, slots_per_epoch=s_len, n_epochs=3, kappa=kappa,
        delta=delta, e_max=e_max, gamma=0.02, local_steps=1, sigma=0.0, seed=seed,
        algorithm=alg, objective=ObjectiveSpec(kind="quadratic", dim=2),
    )
    # Strict mode asserts battery bounds and exact conservation every slot.
    res = run(cfg, strict_checks=True)
    if delta == 0.0:
        assert res.total_energy == 0.0
    assert res.ledger.harvested_total >= res.total_energy
    replay = run(cfg, strict_checks=True)
    assert replay.metrics == res.metrics
