"""Deterministic pseudo-randomness for all shuffling in this package.

Every data shuffle (train/test splits, fold assignment, random feature
partitions) goes through splitmix64 + Fisher-Yates so that results are
reproducible bit-for-bit from integer seeds alone, independent of numpy
version or platform. The exact recipe is documented in the README under
"Reproducibility" so other implementations can match it.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """splitmix64 generator (Steele, Lea & Flood mixer over a 64-bit counter)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Integer in [0, n). Plain modulo reduction: its bias is immaterial
        for n << 2**64 and keeps the recipe trivial to port."""
        if n <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % n


def permutation(n: int, seed: int) -> list[int]:
    """Seeded permutation of range(n).

    Fisher-Yates: for i = n-1 down to 1, swap position i with
    position j = below(i + 1).
    """
    rng = SplitMix64(seed)
    items = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        items[i], items[j] = items[j], items[i]
    return items


def mix_seed(base: int, *salts: int) -> int:
    """Derive a child seed from a base seed and integer salts.

    Each salt folds into the state via one splitmix64 draw, so distinct
    salt tuples give independent-looking streams.
    """
    state = base & _MASK
    for salt in salts:
        state = SplitMix64(state ^ ((salt * _GAMMA) & _MASK)).next_u64()
    return state
