"""Seedable random streams with stable, keyed substreams.

Substreams are addressed by a key path (e.g. replicate 17, patient 3) rather
than by the order in which they are requested, so adding patients or running
replicates in a different order never changes anyone else's draws.
"""

from __future__ import annotations

import numpy as np


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if seed is None:
        raise ValueError("a seed is required for reproducible randomization")
    return np.random.SeedSequence(int(seed))


def substream(seed, *keys: int) -> np.random.SeedSequence:
    ss = as_seed_sequence(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(int(k) for k in keys))


def generator(seed, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(substream(seed, *keys)))
