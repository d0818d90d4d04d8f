"""Deterministic random-number streams.

All Monte Carlo code draws from counter-based Philox (4x64) generators.  A
run is parameterized by a 64-bit master seed; independent substreams are
derived by keying Philox with the pair (master_seed, partition_index), so a
partitioned computation produces identical results for any worker count.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(master_seed: int, partition: int = 0) -> np.random.Generator:
    """Generator for the given (master seed, partition index) substream."""
    key = np.array([int(master_seed) & _MASK64, int(partition) & _MASK64],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
