"""Seeded random streams.

Every stream is a numpy ``Generator`` over the counter-based Philox-4x64
bit generator, keyed by a ``SeedSequence`` built from a tuple of
non-negative integers. Distinct key tuples give independent streams, so
results never depend on execution order.
"""
from __future__ import annotations

import numpy as np

# stream tags used as the last key component
CODE = 0
GALLAGER_FALLBACK = 1
GALLAGER_VERIFY = 2
PAIR = 3


def seed_sequence(*keys: int) -> np.random.SeedSequence:
    if any(int(k) < 0 for k in keys):
        raise ValueError("seed keys must be non-negative")
    return np.random.SeedSequence([int(k) for k in keys])


def bit_generator(*keys: int) -> np.random.Philox:
    return np.random.Philox(seed_sequence(*keys))


def make_rng(*keys: int) -> np.random.Generator:
    return np.random.Generator(bit_generator(*keys))
