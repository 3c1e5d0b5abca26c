"""Seeded 64-bit PRNG with labeled sub-streams.

Everything stochastic in this package flows through :class:`RngStream` so that
a suite can be regenerated bit-for-bit from its seeds alone, in any
implementation of the same mixing function. The generator is a splitmix-style
64-bit mixer; sub-streams are derived by folding an FNV-1a hash of a text
label into the parent seed. The canonical output is the raw u64 sequence;
floats are derived from the top 53 bits.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

ALGORITHM_ID = "splitmix64/fnv1a-labels/v1"


def mix64(x: int) -> int:
    """One splitmix64 finalization round."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def fnv1a64(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


class RngStream:
    """Deterministic draw stream identified by (seed, stream_label)."""

    __slots__ = ("seed", "label", "_state")

    def __init__(self, seed: int, label: str = ""):
        self.seed = seed & _MASK64
        self.label = label
        self._state = mix64(self.seed ^ fnv1a64(label)) if label else self.seed

    def substream(self, label: str) -> "RngStream":
        """Child stream; drawing from it never perturbs the parent."""
        return RngStream(self.seed, f"{self.label}/{label}" if self.label else label)

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + int(self.random() * (hi - lo + 1))

    def choice(self, items):
        return items[self.randint(0, len(items) - 1)]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i)
            items[i], items[j] = items[j], items[i]

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Box-Muller; consumes exactly two uniforms per call."""
        u1 = self.random()
        u2 = self.random()
        while u1 <= 0.0:  # log(0) guard; probability 2^-53
            u1 = self.random()
            u2 = self.random()
        r = math.sqrt(-2.0 * math.log(u1))
        return mu + sigma * r * math.cos(2.0 * math.pi * u2)


def derive_seed(master_seed: int, *labels: str) -> int:
    """Stable 64-bit task seed from a master seed and a label path."""
    stream = RngStream(master_seed, "/".join(labels))
    return stream.next_u64()
