"""Named, counter-based RNG streams for reproducible simulations.

Every random draw in a run comes from a stream fully determined by
(seed, purpose, index).  Streams are backed by the Philox counter-based
generator, so per-client streams never interact and runs replay bit-for-bit
regardless of how work is scheduled.

Stream purposes:
    CHARGING   one stream per client, Bernoulli battery-charge draws
    NOISE      one stream per client, stochastic-gradient noise
    GROUPING   one stream per run, group slicing / hub and star picks
    OBJECTIVE  one stream per run, synthetic objective generation
"""
from __future__ import annotations

import numpy as np

CHARGING = 0
NOISE = 1
GROUPING = 2
OBJECTIVE = 3


def stream(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    """Return the generator for one named stream."""
    ss = np.random.SeedSequence(entropy=(seed, purpose, index))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *indices: int) -> int:
    """Derive a stable 63-bit child seed (used for sweep cells)."""
    ss = np.random.SeedSequence(entropy=(seed, *indices))
    return int(ss.generate_state(1, np.uint64)[0] >> 1)
