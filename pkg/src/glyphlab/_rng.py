"""Deterministic random number generation shared by all glyphlab modules.

Every stochastic operation in the package (attack position sampling,
watermark green lists, token sampling, corpus synthesis) draws from the
SplitMix64 generator defined here, so a 64-bit seed reproduces results
bit-for-bit across runs and across reimplementations in other languages.

SplitMix64 constants (Steele, Lea & Flood's splittable PRNG):

    increment ("golden gamma")  0x9E3779B97F4A7C15
    finalizer multiplier 1      0xBF58476D1CE4E5B9
    finalizer multiplier 2      0x94D049BB133111EB

The n-th output for seed ``s`` is ``mix64(s + n * GOLDEN_GAMMA)``, which
is what :func:`u64_stream` evaluates in vectorized form.
"""
from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX_MUL_1 = 0xBF58476D1CE4E5B9
_MIX_MUL_2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(x: int) -> int:
    """SplitMix64 finalizer: statistically mixes a 64-bit value."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _MIX_MUL_1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX_MUL_2) & MASK64
    return x ^ (x >> 31)


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash, used to fold strings into seed material."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def derive_seed(master: int, *parts: int | str | bytes) -> int:
    """Derive a child seed from a master seed and identifying parts.

    Used so that e.g. every sample in an evaluation run gets its own
    reproducible attack seed from (master seed, sample id).
    """
    h = mix64(master)
    for part in parts:
        if isinstance(part, str):
            part = part.encode("utf-8")
        if isinstance(part, bytes):
            part = fnv1a64(part)
        h = mix64(h ^ (part & MASK64))
    return h


class SplitMix64:
    """Sequential SplitMix64 generator.

    Output n is ``mix64(seed + (n+1) * GOLDEN_GAMMA)``; see module
    docstring for the constants.
    """

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN_GAMMA) & MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        limit = MASK64 + 1 - ((MASK64 + 1) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def choice_index(self, length: int) -> int:
        return self.randbelow(length)

    def sample_indices(self, n: int, k: int) -> list[int]:
        """Sample k distinct indices from range(n), uniformly without
        replacement, by partial Fisher-Yates. Draw order is part of the
        contract: the first j results for budget k are identical to the
        results for budget j.
        """
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n}")
        swapped: dict[int, int] = {}
        out: list[int] = []
        for i in range(k):
            j = i + self.randbelow(n - i)
            vi = swapped.get(i, i)
            vj = swapped.get(j, j)
            out.append(vj)
            swapped[j] = vi
        return out


def u64_stream(seed: int, count: int) -> np.ndarray:
    """First ``count`` outputs of SplitMix64(seed) as a uint64 array.

    Bit-identical to calling :meth:`SplitMix64.next_u64` count times;
    vectorized because green-list construction needs long streams.
    """
    with np.errstate(over="ignore"):
        idx = np.arange(1, count + 1, dtype=np.uint64)
        x = np.uint64(seed & MASK64) + idx * np.uint64(GOLDEN_GAMMA)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX_MUL_1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX_MUL_2)
        return x ^ (x >> np.uint64(31))
