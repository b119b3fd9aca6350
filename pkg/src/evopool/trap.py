"""Concatenated deceptive trap functions on fixed-length bitstrings.

A trap block of length ``l`` scores ``l`` when every bit is one (the
unique global optimum) and ``l - 1 - u`` for ``u < l`` ones, so the
block is easiest to climb toward all zeros (value ``l - 1``) and the
landscape actively misleads hill climbers.  A chromosome is scored as
the sum over consecutive non-overlapping blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrapSpec:
    """Benchmark geometry: block length and number of concatenated blocks."""

    trap_length: int = 4
    trap_count: int = 40

    def __post_init__(self):
        if self.trap_length < 2:
            raise ValueError(f"trap_length must be >= 2, got {self.trap_length}")
        if self.trap_count < 1:
            raise ValueError(f"trap_count must be >= 1, got {self.trap_count}")

    @property
    def length(self) -> int:
        """Chromosome length in bits."""
        return self.trap_length * self.trap_count

    @property
    def max_fitness(self) -> int:
        """Value of the all-ones string, the unique global optimum."""
        return self.trap_length * self.trap_count


def trap_fitness(block, trap_length: int) -> int:
    """Score one block: `l` at all ones, `l - 1 - ones` otherwise."""
    if len(block) != trap_length:
        raise ValueError(
            f"block length {len(block)} != trap length {trap_length}"
        )
    ones = int(sum(int(b) for b in block))
    if ones == trap_length:
        return trap_length
    return trap_length - 1 - ones


def evaluate(bits, spec: TrapSpec) -> int:
    """Fitness of a full chromosome: sum of trap_fitness over its blocks."""
    if len(bits) != spec.length:
        raise ValueError(
            f"chromosome length {len(bits)} != {spec.length} "
            f"({spec.trap_count} traps of {spec.trap_length} bits)"
        )
    if isinstance(bits, np.ndarray):
        return int(evaluate_matrix(bits.reshape(1, -1), spec)[0])
    l = spec.trap_length
    total = 0
    for i in range(0, spec.length, l):
        total += trap_fitness(bits[i : i + l], l)
    return total


def evaluate_matrix(bits: np.ndarray, spec: TrapSpec) -> np.ndarray:
    """Vectorized `evaluate` over an (n, length) 0/1 matrix."""
    n, length = bits.shape
    if length != spec.length:
        raise ValueError(f"chromosome length {length} != {spec.length}")
    l = spec.trap_length
    ones = bits.reshape(n, spec.trap_count, l).sum(axis=2, dtype=np.int64)
    vals = np.where(ones == l, l, l - 1 - ones)
    return vals.sum(axis=1)


def is_solution(bits, spec: TrapSpec) -> bool:
    """True iff every bit is one (equivalently fitness == max_fitness)."""
    if len(bits) != spec.length:
        raise ValueError(f"chromosome length {len(bits)} != {spec.length}")
    return all(int(b) == 1 for b in bits)


def bits_from_string(s: str, spec: TrapSpec | None = None) -> np.ndarray:
    """Parse an ASCII '0'/'1' string into a uint8 array, validating alphabet."""
    try:
        raw = s.encode("ascii")
    except (UnicodeEncodeError, AttributeError) as exc:
        raise ValueError("chromosome must be a string over {'0','1'}") from exc
    arr = np.frombuffer(raw, dtype=np.uint8) - ord("0")
    if arr.size == 0 or bool((arr > 1).any()):
        raise ValueError("chromosome must be a non-empty string over {'0','1'}")
    if spec is not None and arr.size != spec.length:
        raise ValueError(f"chromosome length {arr.size} != {spec.length}")
    return arr


def bits_to_string(bits) -> str:
    if isinstance(bits, np.ndarray):
        return (bits.astype(np.uint8) + ord("0")).tobytes().decode("ascii")
    return "".join("1" if int(b) else "0" for b in bits)
