"""Counter-based random streams: bit-reproducible for a fixed seed, independent
of threading or evaluation order."""

import numpy as np

_MASK = (1 << 64) - 1


def stream(seed: int, *ids: int) -> np.random.Generator:
    """A Philox generator keyed by (seed, ids...); same arguments, same stream."""
    key = np.zeros(2, dtype=np.uint64)
    key[0] = np.uint64(seed & _MASK)
    mix = 0x9E3779B97F4A7C15
    acc = 0
    for i in ids:
        acc = (acc ^ (i & _MASK)) * mix & _MASK
        acc = (acc >> 29 ^ acc) * 0xBF58476D1CE4E5B9 & _MASK
    key[1] = np.uint64(acc)
    return np.random.Generator(np.random.Philox(key=key))
