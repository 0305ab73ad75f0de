"""Seeded 64-bit random streams.

All randomness in the package comes from SplitMix64 (Steele, Lea & Flood,
"Fast splittable pseudorandom number generators", OOPSLA 2014):

    state  += 0x9E3779B97F4A7C15            (mod 2**64)
    z       = state
    z       = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z       = (z ^ (z >> 27)) * 0x94D049BB133111EB
    output  = z ^ (z >> 31)

Bounded integers use rejection sampling on the top of the 64-bit range, so
results do not depend on platform float behaviour. The algorithm and its
constants are frozen for the 0.x series.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijection on 64-bit words."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *keys: int) -> int:
    """Derive a child seed from ``base`` and a path of non-negative integer keys.

    Each key is folded in as ``h = mix64(h + GOLDEN_GAMMA * (key + 1))``, so
    children of the same parent are independent streams and no coordination
    between workers is needed.
    """
    h = mix64(base & MASK64)
    for key in keys:
        if key < 0:
            raise ValueError("seed keys must be non-negative")
        h = mix64((h + GOLDEN_GAMMA * (key + 1)) & MASK64)
    return h


class SplitMix64:
    """Minimal SplitMix64 generator."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be a non-negative 64-bit integer")
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` for ``1 <= n <= 2**64``."""
        if not 0 < n <= 1 << 64:
            raise ValueError(f"bound out of range: {n}")
        # reject the tail that would bias the modulo
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range ``[lo, hi]``."""
        return lo + self.below(hi - lo + 1)

    def bit(self) -> bool:
        return bool(self.next_u64() >> 63)
