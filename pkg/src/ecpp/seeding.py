"""Deterministic stream derivation for augmentation and initialization.

Every stochastic choice in the package is drawn from a counter-based Philox
generator whose key is mixed from integer coordinates (seed, epoch, step,
item, view, op ...). Streams for different coordinates are independent, so
reordering or parallelizing work never changes any individual draw.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def mix64(*parts: int) -> int:
    """Fold integer coordinates into one well-mixed 64-bit value."""
    h = 0x8C2F9D3A6B41E715
    for p in parts:
        h = _splitmix64(h ^ (int(p) & _MASK64))
    return h


def stream(*parts: int) -> np.random.Generator:
    """Philox generator keyed by the given coordinates."""
    key = np.array([mix64(*parts, 0), mix64(*parts, 1)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
