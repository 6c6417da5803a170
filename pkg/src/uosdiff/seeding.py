"""Deterministic substream derivation.

A master seed plus an integer path (replicate index, purpose tag, ...) maps
to an independent generator through numpy's SeedSequence spawn keys, which
use a splitmix-style hash.  The purpose tags below keep the data, recovery,
evaluation, and sampler streams disjoint.
"""

from __future__ import annotations

import numpy as np

TARGET = 0
DATA = 1
RECOVERY = 2
EVAL = 3
SAMPLER = 4
FRESH = 5


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for the given (seed, path) pair; stable across platforms."""
    seq = np.random.SeedSequence(entropy=int(master_seed),
                                 spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(seq))
