"""Seeded pseudo-random numbers from the splitmix64 sequence.

The generator is pinned to a fixed algorithm (rather than a library
generator) so fixtures reproduce bit-identically anywhere:

    state_i = (seed + i * 0x9E3779B97F4A7C15) mod 2**64       for i = 1, 2, ...
    u64_i   = mix(state_i)

where ``mix`` is the splitmix64 finalizer

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

Uniform doubles take the top 53 bits: u64 >> 11 times 2**-53.  Normal
deviates come from the Box-Muller transform on consecutive uniform pairs.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


class Rng:
    """Counter-based splitmix64 stream; every draw advances the counter."""

    def __init__(self, seed: int):
        self._seed = int(seed) & _MASK
        self._count = 0

    def u64(self) -> int:
        self._count += 1
        return _mix((self._seed + self._count * _GOLDEN) & _MASK)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * ((self.u64() >> 11) * 2.0**-53)

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi] inclusive."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.u64() % (hi - lo + 1)

    def normal(self) -> float:
        u1 = max(self.uniform(), 2.0**-53)
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def uniform_array(self, n: int) -> np.ndarray:
        start = self._count + 1
        self._count += n
        idx = np.arange(start, start + n, dtype=np.uint64)
        z = (np.uint64(self._seed) + idx * np.uint64(_GOLDEN))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
        return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal_array(self, n: int) -> np.ndarray:
        m = (n + 1) // 2
        u1 = np.maximum(self.uniform_array(m), 2.0**-53)
        u2 = self.uniform_array(m)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return out[:n]
