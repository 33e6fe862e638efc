"""SplitMix64 counter-based generator used by every seeded routine.

Word ``k`` (0-based) of the stream for ``seed`` is ``mix(seed + (k + 1) * GAMMA)``
with wrap-around 64-bit arithmetic, where ``mix`` is the SplitMix64 finalizer
(Steele, Lea & Flood 2014).  Uniform floats take the top 53 bits; uniform
integers below ``n`` are ``floor(float * n)`` clamped to ``n - 1``.
"""

from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def words(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Return stream words ``start .. start+count-1`` as ``uint64``."""
    k = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK) + k * GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z = z ^ (z >> np.uint64(31))
    return z


def uniform(seed: int, count: int, start: int = 0) -> np.ndarray:
    return (words(seed, count, start) >> np.uint64(11)).astype(np.float64) * (2.0**-53)


def integers_below(n: int, seed: int, count: int, start: int = 0) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.floor(uniform(seed, count, start) * n).astype(np.int64)
    np.minimum(out, n - 1, out=out)
    return out
