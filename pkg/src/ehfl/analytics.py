"""Binomial participation machinery.

A client entering its pre-training window with battery level ``m`` launches a
session iff its level reaches the training cost ``kappa`` within the window,
which under per-slot Bernoulli(delta) charging over ``S`` slots gives

    p(m) = Pr(Bin(S, delta) >= max(0, kappa - m)).

The uniform lower bound over start levels is p(0); the convergence analysis
requires it to be at least ``1 / (6 sqrt(N))``, and the minimal epoch length
achieving any target bound is found by scanning S upward (the tail is
strictly increasing in S with limit 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:  # pragma: no cover
    from .config import ExperimentConfig
    from .engine import MetricsRecord

# Above this trial count, exact comb() factors overflow double precision,
# so pmf terms switch to log space.
_EXACT_COMB_LIMIT = 500


def binom_tail(k: int, n: int, p: float) -> float:
    """Upper tail Pr(Bin(n, p) >= k), absolute error below 1e-12.

    Accepts k in [0, n + 1]; k = 0 gives 1 and k = n + 1 gives 0.
    """
    if not 0 <= k <= n + 1:
        raise ValueError(f"k must be in [0, {n + 1}], got {k}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if k == 0:
        return 1.0
    if k == n + 1:
        return 0.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    # Sum the shorter side and complement if that side is the lower tail.
    if n - k >= k - 1:
        return min(1.0, _pmf_sum(0, k - 1, n, p, complement=True))
    return min(1.0, _pmf_sum(k, n, n, p, complement=False))


def _pmf_sum(lo: int, hi: int, n: int, p: float, complement: bool) -> float:
    log_p = math.log(p)
    log_q = math.log1p(-p)
    total = 0.0
    if n <= _EXACT_COMB_LIMIT:
        for j in range(lo, hi + 1):
            total += math.comb(n, j) * math.exp(j * log_p + (n - j) * log_q)
    else:
        log_fact_n = math.lgamma(n + 1)
        for j in range(lo, hi + 1):
            log_c = log_fact_n - math.lgamma(j + 1) - math.lgamma(n - j + 1)
            total += math.exp(log_c + j * log_p + (n - j) * log_q)
    return 1.0 - total if complement else total


def participation_prob(m: int, kappa: int, s: int, delta: float) -> float:
    """Chance a client starting a pre-training window at level m gets to train."""
    if m < 0:
        raise ValueError(f"start level must be >= 0, got {m}")
    needed = max(0, kappa - m)
    if needed > s:
        return 0.0  # the window cannot harvest that many units
    return binom_tail(needed, s, delta)


def participation_threshold(n_clients: int) -> float:
    """Uniform participation level required by the convergence guarantee."""
    return 1.0 / (6.0 * math.sqrt(n_clients))


def meets_participation_threshold(n_clients: int, kappa: int, s: int, delta: float) -> bool:
    """Whether the worst-case participation probability clears the threshold."""
    return binom_tail(kappa, s, delta) >= participation_threshold(n_clients)


def minimal_epoch_slots(kappa: int, delta: float, epsilon: float) -> int:
    """Smallest S >= kappa with Pr(Bin(S, delta) >= kappa) >= epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if delta <= 0.0:
        raise ValueError("no epoch length works with zero charging probability")
    s = kappa
    while binom_tail(kappa, s, delta) < epsilon:
        s += 1
    return s


@dataclass(frozen=True)
class ParticipationBound:
    """Participation probability by start level, with the analysis constants."""

    p_of_m: tuple[float, ...]     # index m in [0, e_max]
    uniform_lower: float          # p(0)
    theorem_threshold: float      # 1 / (6 sqrt(N))

    @property
    def threshold_met(self) -> bool:
        return self.uniform_lower >= self.theorem_threshold


def participation_bound(cfg: "ExperimentConfig") -> ParticipationBound:
    table = tuple(
        participation_prob(m, cfg.kappa, cfg.slots_per_epoch, cfg.delta)
        for m in range(cfg.e_max + 1)
    )
    return ParticipationBound(table, table[0], participation_threshold(cfg.n_clients))


def empirical_participation(metrics: Sequence["MetricsRecord"],
                            n_clients: int) -> tuple[list[float], float]:
    """Per-epoch fraction of clients whose update entered aggregation, and its mean."""
    fractions = [rec.participants / n_clients for rec in metrics]
    average = sum(fractions) / len(fractions) if fractions else 0.0
    return fractions, average
