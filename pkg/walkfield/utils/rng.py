# -*- coding: utf-8 -*-
"""Seeded random streams.

Every stochastic operation takes an explicit 64-bit seed. Independent
sub-streams (replicates, chains, loci) are addressed by spawn keys, so the
same (seed, key) pair always yields the same numbers regardless of the order
or process in which streams are created.
"""
import numpy as np

SEED_MAX = 2**64


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed < SEED_MAX:
        raise ValueError(f"seed out of 64-bit range: {seed}")
    return seed


def stream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))
