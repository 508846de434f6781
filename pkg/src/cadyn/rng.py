"""Named, splittable random streams.

A stream is addressed by a root seed plus a path of names and indices, e.g.
``stream(7, "gilman", "x", 12)``.  Paths map to numpy ``SeedSequence`` spawn
keys, so a sample's randomness depends only on its address and never on how
work is split between tasks.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("stream indices must be non-negative")
        return int(part)
    return zlib.crc32(str(part).encode()) | (1 << 32)


def seed_sequence(seed: int, *path) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(p) for p in path))


def stream(seed: int, *path) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *path)))
