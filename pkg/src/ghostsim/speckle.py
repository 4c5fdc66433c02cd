"""Seeded speckle-pattern generation.

Patterns are drawn from per-pattern counter-based streams (Philox) so
generation is order-independent and reproducible bit for bit. Stream
keys derive from (set seed, pattern index) through a fixed splitmix64
hash; batch-level seeds derive from (base seed, batch index) through
the same hash in a separate domain. These identities are part of the
dataset container contract and must not change.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ZeroDimension
from .imagecore import Image

__all__ = [
    "Distribution",
    "SpecklePattern",
    "SpeckleSet",
    "derive_stream_key",
    "derive_bgf_seed",
    "gen_speckle_set",
    "bgf_speckle_policy",
]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_BGF_DOMAIN = 0x42474653504C4954  # distinct derivation domain for batch seeds


class Distribution(str, Enum):
    """Per-pixel intensity law of a speckle pattern."""

    UNIFORM01 = "uniform01"
    BINARY = "binary"

    @property
    def code(self) -> int:
        return 0 if self is Distribution.UNIFORM01 else 1

    @classmethod
    def from_code(cls, code: int) -> "Distribution":
        if code == 0:
            return cls.UNIFORM01
        if code == 1:
            return cls.BINARY
        raise ValueError(f"unknown distribution code {code}")


def _splitmix64(x: int) -> int:
    z = (x + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_stream_key(seed: int, index: int) -> int:
    """64-bit Philox key for pattern `index` of the set seeded by `seed`."""
    return _splitmix64((seed & _MASK) ^ _splitmix64(index & _MASK))


def derive_bgf_seed(base_seed: int, bgf_index: int) -> int:
    """Stable per-batch seed derived from the run's base seed."""
    return _splitmix64(((base_seed & _MASK) ^ _BGF_DOMAIN) + (bgf_index & _MASK))


@dataclass(frozen=True)
class SpecklePattern:
    """One illumination pattern plus its provenance within a set."""

    image: Image
    seed: int
    index: int


@dataclass
class SpeckleSet:
    """An ordered set of m speckle patterns sharing one seed.

    The raw m x H x W stack is the working representation; the
    SpecklePattern wrappers are materialized lazily.
    """

    stack: np.ndarray
    seed: int
    distribution: Distribution
    _patterns: tuple = field(default=None, repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.stack.shape[0]

    @property
    def height(self) -> int:
        return self.stack.shape[1]

    @property
    def width(self) -> int:
        return self.stack.shape[2]

    @property
    def patterns(self) -> tuple:
        if self._patterns is None:
            pats = tuple(
                SpecklePattern(image=Image(self.stack[i]), seed=self.seed, index=i)
                for i in range(self.m)
            )
            object.__setattr__(self, "_patterns", pats)
        return self._patterns


def _draw_pattern(key: int, h: int, w: int, distribution: Distribution) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=key))
    if distribution is Distribution.UNIFORM01:
        return rng.random((h, w))
    return rng.integers(0, 2, size=(h, w)).astype(np.float64)


def gen_speckle_set(seed: int, m: int, h: int, w: int, distribution="uniform01") -> SpeckleSet:
    """Generate m patterns of size h x w from independent keyed streams.

    Identical arguments always reproduce the identical set; patterns at
    different indices come from unrelated streams, so generation order
    does not matter.
    """
    if m < 1 or h < 1 or w < 1:
        raise ZeroDimension(f"speckle set needs m, h, w >= 1, got ({m}, {h}, {w})")
    dist = Distribution(distribution)
    stack = np.empty((m, h, w), dtype=np.float64)
    for i in range(m):
        stack[i] = _draw_pattern(derive_stream_key(seed, i), h, w, dist)
    stack.flags.writeable = False
    return SpeckleSet(stack=stack, seed=seed & _MASK, distribution=dist)


def bgf_speckle_policy(base_seed: int, bgf_index: int, m: int, h: int, w: int,
                       distribution="uniform01") -> SpeckleSet:
    """Speckle set for one batch group frame.

    Distinct batch indices map to distinct derived seeds; the same index
    always reproduces the same set, which is what lets all frames of a
    batch share their illumination.
    """
    return gen_speckle_set(derive_bgf_seed(base_seed, bgf_index), m, h, w, distribution)
