"""Deterministic sub-seed derivation for reproducible batch sampling."""

from __future__ import annotations

import numpy as np


def child_seed(master_seed: int, *key: int) -> int:
    """Derive an integer child seed from a master seed and an index key.

    The mapping is pure: a given ``(master_seed, key)`` always yields the
    same child, so batched simulations are reproducible regardless of
    scheduling or worker count.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


def child_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Generator seeded with :func:`child_seed` of the given key."""
    return np.random.default_rng(child_seed(master_seed, *key))
