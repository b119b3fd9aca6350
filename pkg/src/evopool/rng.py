"""Deterministic counter-based random source.

All randomness in this package flows through one primitive: a 64-bit
finalizer applied to ``key + address * PHI`` (the splitmix64 output
function).  Draws are therefore pure functions of (key, address), which
buys two properties that ordinary stateful generators do not give us:

* batches of draws can be evaluated in any order, vectorized with numpy
  or inlined in a compiled kernel, and still produce identical values;
* the stream is bit-stable across platforms and runtimes, since it uses
  nothing but wrapping uint64 arithmetic and exact IEEE-754 conversions.

`Rng` wraps the primitive as a conventional sequential stream (the
address is an incrementing counter) for code that just wants "a seeded
RNG".  The evolution engine instead addresses draws explicitly by
(purpose, generation, index); see engine.py.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
PHI = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_U_PHI = np.uint64(PHI)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)

#: 2**-53, scale factor turning the top 53 bits of a word into [0, 1).
UNIT_SCALE = 2.0 ** -53


def mix64(z: int) -> int:
    """Finalize one 64-bit value (scalar, exact Python ints)."""
    z &= MASK64
    z ^= z >> 30
    z = (z * _M1) & MASK64
    z ^= z >> 27
    z = (z * _M2) & MASK64
    z ^= z >> 31
    return z


def word_at(key: int, addr: int) -> int:
    """The random 64-bit word at `addr` under `key`."""
    return mix64((key + (addr & MASK64) * PHI) & MASK64)


def words_at(key: int, addrs: np.ndarray) -> np.ndarray:
    """Vectorized `word_at` over a uint64 address array."""
    with np.errstate(over="ignore"):
        z = np.uint64(key & MASK64) + addrs.astype(np.uint64, copy=False) * _U_PHI
        z ^= z >> np.uint64(30)
        z *= _U_M1
        z ^= z >> np.uint64(27)
        z *= _U_M2
        z ^= z >> np.uint64(31)
    return z


def unit_from_word(w: int) -> float:
    """Map a 64-bit word to a float in [0, 1) using its top 53 bits."""
    return (w >> 11) * UNIT_SCALE


def units_from_words(w: np.ndarray) -> np.ndarray:
    return (w >> np.uint64(11)) * UNIT_SCALE


class Rng:
    """Sequential deterministic stream over the counter primitive.

    Two instances with the same seed produce the same draws on any
    platform.  `spawn` derives an independent child stream; the parent
    advances by one draw.
    """

    __slots__ = ("key", "_ctr")

    def __init__(self, seed: int):
        self.key = seed & MASK64
        self._ctr = 0

    def u64(self) -> int:
        w = word_at(self.key, self._ctr)
        self._ctr += 1
        return w

    def u64_array(self, n: int) -> np.ndarray:
        a = np.arange(self._ctr, self._ctr + n, dtype=np.uint64)
        self._ctr += n
        return words_at(self.key, a)

    def unit(self) -> float:
        return unit_from_word(self.u64())

    def unit_array(self, n: int) -> np.ndarray:
        return units_from_words(self.u64_array(n))

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return int(self.unit() * bound)

    def below_array(self, bound: int, n: int) -> np.ndarray:
        if bound <= 0:
            raise ValueError("bound must be positive")
        return (self.unit_array(n) * bound).astype(np.int64)

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.unit()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.below(hi - lo + 1)

    def normal(self) -> float:
        """Standard normal via Box-Muller (two stream draws per value)."""
        u1 = 1.0 - self.unit()  # (0, 1], keeps log() finite
        u2 = self.unit()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def lognormal(self, mu: float, sigma: float) -> float:
        return math.exp(mu + sigma * self.normal())

    def spawn(self) -> "Rng":
        """Derive an independent child stream."""
        return Rng(self.u64())

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
