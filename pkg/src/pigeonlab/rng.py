"""Deterministic random streams.

Every random choice in the package goes through :class:`Stream`.  A stream is
a PCG64 generator seeded by ``numpy.random.SeedSequence(seed, spawn_key=key)``;
only the raw 64-bit output words are used, and the derived operations
(bounded integers, subsets, weighted choice) are implemented here so that the
results do not depend on numpy's higher-level sampling algorithms.  The same
``(seed, key)`` therefore yields the same values on every platform.

Keys make streams splittable: ``stream(seed, "graph", i)`` is the stream used
for pigeon ``i`` of a sampled graph, independent of every other pigeon.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _key_word(part) -> int:
    if isinstance(part, int) and part >= 0:
        return part
    digest = hashlib.sha256(str(part).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


class Stream:
    def __init__(self, seed: int, *key):
        seed = int(seed) & _MASK64
        ss = np.random.SeedSequence(seed, spawn_key=tuple(_key_word(k) for k in key))
        self._bg = np.random.PCG64(ss)

    def next64(self) -> int:
        return int(self._bg.random_raw())

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` by rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        if bound == 1:
            return 0
        bits = (bound - 1).bit_length()
        words = (bits + 63) // 64
        while True:
            x = 0
            for _ in range(words):
                x = (x << 64) | self.next64()
            x >>= words * 64 - bits
            if x < bound:
                return x

    def between(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]``."""
        return lo + self.below(hi - lo + 1)

    def subset(self, n: int, k: int) -> list[int]:
        """Uniform ``k``-subset of ``range(n)``, sorted (Floyd's algorithm)."""
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        chosen: set[int] = set()
        for j in range(n - k, n):
            t = self.below(j + 1)
            chosen.add(j if t in chosen else t)
        return sorted(chosen)

    def weighted(self, weights) -> int:
        """Index ``i`` with probability ``weights[i] / sum(weights)``; integer weights."""
        total = sum(weights)
        x = self.below(total)
        for i, w in enumerate(weights):
            if x < w:
                return i
            x -= w
        raise AssertionError("unreachable")

    def coin(self) -> int:
        return self.next64() >> 63

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def stream(seed: int, *key) -> Stream:
    return Stream(seed, *key)
