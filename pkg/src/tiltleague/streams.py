"""Deterministic derivation of independent random streams.

Every source of randomness in the package is a counter-based Philox
generator keyed by the master seed, a purpose tag, and integer indices
(replica, team, ...). Derivation is pure: the same key always yields the
same stream, independent of creation order or thread scheduling, which is
what makes parallel replicas reproducible.

Tags are hashed with CRC-32 rather than ``hash()`` so keys are stable
across interpreter runs and PYTHONHASHSEED settings.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def substream(master_seed: int, tag: str, *indices: int) -> np.random.Generator:
    """Return the generator for key ``(master_seed, tag, *indices)``.

    The index count is part of the key: SeedSequence ignores trailing zero
    entropy words, so without it ``(tag, 0)`` and ``(tag, 0, 0)`` would
    collide.
    """
    entropy = (int(master_seed) & _MASK64, zlib.crc32(tag.encode("utf-8")),
               len(indices), *(int(i) & _MASK64 for i in indices))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
