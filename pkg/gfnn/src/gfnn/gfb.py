"""GFB1 dataset files: reading, writing, and plane regeneration.

The container is a little-endian binary format shared with the
simulation toolkit that produces the datasets. One file holds entries
of common height, width, and sample count m:

header (18 bytes)
    magic    4 bytes  b"GFB1"
    version  u16      currently 1
    height   u32
    width    u32
    m        u32

entry (repeated until end of file; there is no count field)
    label_len        u16
    label            label_len bytes, UTF-8
    speckle_seed     u64
    distribution     u8   0 = uniform01, 1 = binary
    ground_truth     height*width float32
    buckets          m float32
    planes_included  u8
    planes           m*height*width float32, iff planes_included == 1

Entries without stored planes are regenerable: pattern `i` of the set
seeded by `seed` comes from a NumPy Philox generator keyed by a fixed
splitmix64 hash of (seed, i), and plane i is buckets[i] * pattern[i].
The hash and the draw calls below reproduce the producer bit for bit
and must not change.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ContainerFormatError, ShapeMismatch

__all__ = [
    "MAGIC",
    "VERSION",
    "Entry",
    "Dataset",
    "stream_key",
    "gen_patterns",
    "entry_planes",
    "read_gfb",
    "write_gfb",
]

MAGIC = b"GFB1"
VERSION = 1

_HEADER = struct.Struct("<4sHIII")
_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def stream_key(seed: int, index: int) -> int:
    """Philox key of pattern `index` in the set seeded by `seed`."""
    return _splitmix64((seed & _MASK) ^ _splitmix64(index & _MASK))


def gen_patterns(seed: int, m: int, h: int, w: int, distribution: int) -> np.ndarray:
    """Regenerate the m illumination patterns of a seed-only entry.

    Returns an (m, h, w) float64 stack; distribution 0 is uniform on
    [0, 1), 1 is fair-coin binary.
    """
    if distribution not in (0, 1):
        raise ContainerFormatError(f"unknown distribution code {distribution}")
    stack = np.empty((m, h, w), dtype=np.float64)
    for i in range(m):
        rng = np.random.Generator(np.random.Philox(key=stream_key(seed, i)))
        if distribution == 0:
            stack[i] = rng.random((h, w))
        else:
            stack[i] = rng.integers(0, 2, size=(h, w)).astype(np.float64)
    return stack


@dataclass
class Entry:
    """One measurement set: label, seed, ground truth, buckets, planes."""

    label: str
    speckle_seed: int
    distribution: int
    ground_truth: np.ndarray
    buckets: np.ndarray
    planes: np.ndarray = None

    @property
    def m(self) -> int:
        return self.buckets.shape[0]


@dataclass
class Dataset:
    """A decoded GFB1 file."""

    height: int
    width: int
    m: int
    entries: list = field(default_factory=list)


def entry_planes(entry: Entry, h: int, w: int, patterns: np.ndarray = None) -> np.ndarray:
    """The (m, h, w) measurement planes of an entry.

    Stored planes win; otherwise plane i is buckets[i] times pattern i
    of the entry's seed. Pass a pregenerated `patterns` stack to skip
    regeneration when many entries share one seed.
    """
    if entry.planes is not None:
        return entry.planes
    if patterns is None:
        patterns = gen_patterns(entry.speckle_seed, entry.m, h, w, entry.distribution)
    if patterns.shape != (entry.m, h, w):
        raise ShapeMismatch(f"patterns {patterns.shape} != ({entry.m}, {h}, {w})")
    return entry.buckets[:, None, None] * patterns


class _Cursor:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.pos = 0
        self.path = path

    @property
    def remaining(self) -> int:
        return len(self.data) - self.pos

    def take(self, n: int) -> bytes:
        if self.remaining < n:
            raise ContainerFormatError(
                f"{self.path}: truncated, needed {n} bytes at offset {self.pos}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def floats(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(4 * count), dtype="<f4", count=count)


def read_gfb(path) -> Dataset:
    """Read and decode a GFB1 file.

    Array payloads are returned float32 as stored; the arithmetic that
    consumes them promotes to float64/torch dtypes as needed.
    """
    with open(os.fspath(path), "rb") as fh:
        data = fh.read()
    cur = _Cursor(data, os.fspath(path))
    magic, version, height, width, m = _HEADER.unpack(cur.take(_HEADER.size))
    if magic != MAGIC:
        raise ContainerFormatError(f"{path}: magic {magic!r} is not {MAGIC!r}")
    if version != VERSION:
        raise ContainerFormatError(f"{path}: unsupported container version {version}")
    ds = Dataset(height=height, width=width, m=m)
    while cur.remaining:
        (label_len,) = struct.unpack("<H", cur.take(2))
        label = cur.take(label_len).decode("utf-8")
        seed, dist = struct.unpack("<QB", cur.take(9))
        if dist not in (0, 1):
            raise ContainerFormatError(f"{path}: bad distribution {dist} in '{label}'")
        truth = cur.floats(height * width).reshape(height, width)
        buckets = cur.floats(m)
        (flag,) = struct.unpack("<B", cur.take(1))
        if flag not in (0, 1):
            raise ContainerFormatError(f"{path}: bad planes flag {flag} in '{label}'")
        planes = cur.floats(m * height * width).reshape(m, height, width) if flag else None
        ds.entries.append(Entry(label=label, speckle_seed=seed, distribution=dist,
                                ground_truth=truth, buckets=buckets, planes=planes))
    return ds


def write_gfb(path, entries, height: int, width: int, m: int) -> None:
    """Write entries as a GFB1 file (atomic temp-file replace)."""
    blob = [_HEADER.pack(MAGIC, VERSION, height, width, m)]
    for e in entries:
        truth = np.asarray(e.ground_truth, dtype="<f4")
        buckets = np.asarray(e.buckets, dtype="<f4").ravel()
        if truth.shape != (height, width):
            raise ShapeMismatch(f"'{e.label}' truth {truth.shape} != ({height}, {width})")
        if buckets.shape[0] != m:
            raise ShapeMismatch(f"'{e.label}' has {buckets.shape[0]} buckets, file m = {m}")
        label = e.label.encode("utf-8")
        blob.append(struct.pack("<H", len(label)))
        blob.append(label)
        blob.append(struct.pack("<QB", e.speckle_seed & _MASK, e.distribution))
        blob.append(truth.tobytes())
        blob.append(buckets.tobytes())
        blob.append(struct.pack("<B", 0 if e.planes is None else 1))
        if e.planes is not None:
            planes = np.asarray(e.planes, dtype="<f4")
            if planes.shape != (m, height, width):
                raise ShapeMismatch(
                    f"'{e.label}' planes {planes.shape} != ({m}, {height}, {width})")
            blob.append(planes.tobytes())
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(b"".join(blob))
    os.replace(tmp, path)
