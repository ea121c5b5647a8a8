"""Deterministic 64-bit pseudo-random generation (SplitMix64).

The outer-code mapping can be communicated between endpoints as a bare
seed, so expansion coefficients must regenerate identically on every
implementation.  SplitMix64 (Steele, Lea, Flood: "Fast splittable
pseudorandom number generators") is used as the fixed, named algorithm:
it is trivial to re-implement from its published constants.
"""

from __future__ import annotations

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One SplitMix64 output for the given 64-bit state (finalizer only)."""
    z = (state + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


class SplitMix64:
    """Sequential SplitMix64 stream seeded with a 64-bit value."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def next_bits(self, bits: int) -> int:
        """Low `bits` bits of the next output word (1 <= bits <= 64)."""
        return self.next_u64() & ((1 << bits) - 1)


def derive_seed(master: int, index: int) -> int:
    """Seed for an indexed substream (e.g. one simulation trial)."""
    return splitmix64((master + (index + 1) * _GOLDEN) & _MASK64)
