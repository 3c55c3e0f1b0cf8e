"""Seeded randomness.

All stochastic choices in the toolkit flow through SplitMix64, a portable
64-bit generator with a published reference implementation, so every output
is reproducible bit-for-bit from a single integer seed on any platform.
Per-item seeds are derived by hashing, never by sharing generator state, so
the degree of parallelism cannot change results.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *parts: str | int) -> int:
    """Derive an independent 64-bit seed from a root seed and a label path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(seed & _MASK64).encode("utf-8"))
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest(), "big")


class SplitMix64:
    """SplitMix64 stream (Steele, Lea & Flood; Vigna's reference constants)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), bias-free via rejection sampling."""
        if n <= 0:
            raise ValueError("randrange needs n > 0")
        limit = _MASK64 + 1 - ((_MASK64 + 1) % n)
        while True:
            draw = self.next_u64()
            if draw < limit:
                return draw % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def partial_permutation(self, k: int, n: int) -> list[int]:
        """First k entries of a uniform permutation of [1..n], O(k) space.

        Sparse Fisher-Yates: only displaced slots are materialized, so large
        n costs nothing beyond the k draws actually taken.
        """
        if k > n:
            raise ValueError(f"cannot draw {k} distinct values from [1..{n}]")
        displaced: dict[int, int] = {}
        out: list[int] = []
        for i in range(k):
            j = i + self.randrange(n - i)
            out.append(displaced.get(j, j + 1))
            displaced[j] = displaced.get(i, i + 1)
        return out
