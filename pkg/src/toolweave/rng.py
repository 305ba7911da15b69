"""Fully specified 64-bit PRNG so every sampled artifact is reproducible
across implementations, not just across runs.

Generator: splitmix64. State is one uint64; each step adds the increment
0x9E3779B97F4B7C15 and finalizes with the xor-shift/multiply mix
(0xBF58476D1CE4E5B9, 0x94D049BB133111EB, shifts 30/27/31).

Derived draws are pinned too:
  randint(a, b)  = a + next_u64() % (b - a + 1)      (modulo; bias < 2^-50
                                                      for every range used here)
  uniform(a, b)  = a + (next_u64() >> 11) * 2^-53 * (b - a)
  shuffle        = Fisher-Yates from the top index down
  sample/choices = built on randint as written below
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK = (1 << 64) - 1
_INC = 0x9E3779B97F4B7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

T = TypeVar("T")


class SplitMix64:
    """Deterministic small-state generator; one instance per logical stream."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _INC) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def randint(self, a: int, b: int) -> int:
        """Uniform integer in [a, b], inclusive on both ends."""
        if b < a:
            raise ValueError(f"empty range [{a}, {b}]")
        return a + self.next_u64() % (b - a + 1)

    def uniform(self, a: float, b: float) -> float:
        return a + (self.next_u64() >> 11) * (2.0 ** -53) * (b - a)

    def choice(self, seq: Sequence[T]) -> T:
        if not seq:
            raise ValueError("empty sequence")
        return seq[self.randint(0, len(seq) - 1)]

    def choices(self, seq: Sequence[T], k: int) -> list[T]:
        """k independent draws with replacement."""
        return [self.choice(seq) for _ in range(k)]

    def sample(self, seq: Sequence[T], k: int) -> list[T]:
        """k draws without replacement (partial Fisher-Yates over indices)."""
        n = len(seq)
        if k > n:
            raise ValueError(f"sample size {k} exceeds population {n}")
        idx = list(range(n))
        for i in range(k):
            j = self.randint(i, n - 1)
            idx[i], idx[j] = idx[j], idx[i]
        return [seq[idx[i]] for i in range(k)]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i)
            items[i], items[j] = items[j], items[i]
