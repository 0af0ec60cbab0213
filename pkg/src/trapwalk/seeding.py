"""Deterministic stream derivation.

Every sampling op takes an explicit integer seed.  Independent streams for
environments, walks, marks, and sweeps are derived from that seed through
``numpy.random.SeedSequence`` spawn keys, so the same seed always reproduces
the same bytes regardless of evaluation order or worker count.
"""

from __future__ import annotations

import numpy as np

# Purpose tags keep streams for different roles disjoint.
TAG_ENV = 1
TAG_WALK = 2
TAG_CHAIN = 3
TAG_POINTS = 4
TAG_MARKS = 5
TAG_TAIL = 6
TAG_LIMIT = 7
TAG_SWEEP = 8

# Environment blocks are addressed by signed block index; the offset maps
# them into the non-negative range SeedSequence requires.
BLOCK_SIZE = 4096
_BLOCK_OFFSET = 1 << 40

_U64 = 1 << 64


def _canon(seed: int) -> int:
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    return seed % _U64


def child_sequence(seed: int, *path: int) -> np.random.SeedSequence:
    """SeedSequence for the stream addressed by ``path`` under ``seed``."""
    key = tuple(int(x) for x in path)
    if any(k < 0 for k in key):
        raise ValueError("path components must be non-negative")
    return np.random.SeedSequence(entropy=_canon(seed), spawn_key=key)


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Independent PCG64 generator for the given path."""
    return np.random.Generator(np.random.PCG64(child_sequence(seed, *path)))


def derive_u32(seed: int, *path: int) -> int:
    """32-bit seed for kernels whose RNG accepts only uint32 state."""
    return int(child_sequence(seed, *path).generate_state(1, np.uint32)[0])


def derive_u32_array(seed: int, n: int, *path: int) -> np.ndarray:
    """n distinct uint32 kernel seeds under one path."""
    return child_sequence(seed, *path).generate_state(int(n), np.uint32)


def block_rng(seed: int, block_index: int) -> np.random.Generator:
    """Generator for one environment block (block indices may be negative)."""
    return derive_rng(seed, TAG_ENV, int(block_index) + _BLOCK_OFFSET)
