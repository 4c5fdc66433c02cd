"""GFB1 binary container for ghost-imaging measurement sets.

One file holds entries that share image dimensions and sample count.
All integers and floats are little-endian; array payloads are stored
float32 (math elsewhere stays float64). Layout:

header (18 bytes)
    magic   4 bytes  b"GFB1"
    version u16      currently 1
    height  u32
    width   u32
    m       u32      samples (planes/buckets) per entry

entry (repeated until end of file)
    label_len     u16
    label         label_len bytes, UTF-8 object id
    speckle_seed  u64
    distribution  u8    0 = uniform01, 1 = binary
    ground_truth  height*width float32
    buckets       m float32
    planes_included u8  0 or 1
    planes        m*height*width float32, only if planes_included == 1

With planes_included == 0 the measurement planes are regenerable from
(speckle_seed, distribution, m, height, width) via the pattern
generator; merged results store explicit planes because rotated
patterns have no seed.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    IoFailure,
    LengthMismatch,
    TruncatedFile,
    VersionUnsupported,
)
from .forward import BatchGroupFrame, GroupFrame
from .speckle import Distribution

__all__ = [
    "MAGIC",
    "VERSION",
    "ContainerEntry",
    "Container",
    "read_container",
    "write_container",
    "entry_from_gf",
    "gf_from_entry",
    "group_entries",
]

MAGIC = b"GFB1"
VERSION = 1

_HEADER = struct.Struct("<4sHIII")


@dataclass
class ContainerEntry:
    """One measurement set: an object, its buckets, optional planes."""

    object_id: str
    speckle_seed: int
    distribution: Distribution
    ground_truth: np.ndarray
    buckets: np.ndarray
    planes: np.ndarray = None

    def __post_init__(self):
        self.distribution = Distribution(self.distribution)
        self.ground_truth = np.asarray(self.ground_truth, dtype=np.float64)
        self.buckets = np.asarray(self.buckets, dtype=np.float64).ravel()
        if self.ground_truth.ndim != 2:
            raise DimensionMismatch("ground truth must be 2-D")
        if self.planes is not None:
            self.planes = np.asarray(self.planes, dtype=np.float64)
            expected = (self.buckets.shape[0],) + self.ground_truth.shape
            if self.planes.shape != expected:
                raise LengthMismatch(
                    f"planes shape {self.planes.shape} != expected {expected}")

    @property
    def m(self) -> int:
        return self.buckets.shape[0]


@dataclass
class Container:
    """Decoded GFB1 file: shared dimensions plus the entry list."""

    height: int
    width: int
    m: int
    entries: list = field(default_factory=list)


def _check_entry(entry: ContainerEntry, h: int, w: int, m: int):
    if entry.ground_truth.shape != (h, w):
        raise DimensionMismatch(
            f"entry '{entry.object_id}' ground truth {entry.ground_truth.shape} "
            f"!= container ({h}, {w})")
    if entry.m != m:
        raise LengthMismatch(
            f"entry '{entry.object_id}' has {entry.m} buckets, container m = {m}")


def _encode_entry(entry: ContainerEntry) -> bytes:
    label = entry.object_id.encode("utf-8")
    if len(label) > 0xFFFF:
        raise LengthMismatch("object id exceeds 65535 bytes")
    parts = [
        struct.pack("<H", len(label)),
        label,
        struct.pack("<QB", entry.speckle_seed & 0xFFFFFFFFFFFFFFFF,
                    entry.distribution.code),
        entry.ground_truth.astype("<f4").tobytes(),
        entry.buckets.astype("<f4").tobytes(),
        struct.pack("<B", 0 if entry.planes is None else 1),
    ]
    if entry.planes is not None:
        parts.append(entry.planes.astype("<f4").tobytes())
    return b"".join(parts)


def write_container(path, entries, height=None, width=None, m=None):
    """Write entries to a GFB1 file atomically.

    Dimensions default to those of the first entry; every entry must
    match them.
    """
    entries = list(entries)
    if height is None or width is None:
        if not entries:
            raise LengthMismatch("cannot infer dimensions from an empty container")
        height, width = entries[0].ground_truth.shape
    if m is None:
        if not entries:
            raise LengthMismatch("cannot infer m from an empty container")
        m = entries[0].m
    for entry in entries:
        _check_entry(entry, height, width, m)
    blob = [_HEADER.pack(MAGIC, VERSION, height, width, m)]
    blob.extend(_encode_entry(e) for e in entries)
    path = os.fspath(path)
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(b"".join(blob))
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write container {path}: {exc}") from exc


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
            raise TruncatedFile(
                f"{self.path}: needed {n} bytes at offset {self.pos}, "
                f"only {self.remaining} left")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def floats(self, count: int) -> np.ndarray:
        raw = self.take(4 * count)
        return np.frombuffer(raw, dtype="<f4", count=count).astype(np.float64)


def _decode_entry(cur: _Cursor, h: int, w: int, m: int) -> ContainerEntry:
    (label_len,) = struct.unpack("<H", cur.take(2))
    label = cur.take(label_len).decode("utf-8")
    seed, code = struct.unpack("<QB", cur.take(9))
    try:
        distribution = Distribution.from_code(code)
    except ValueError as exc:
        raise VersionUnsupported(f"{cur.path}: {exc}") from exc
    ground_truth = cur.floats(h * w).reshape(h, w)
    buckets = cur.floats(m)
    (planes_flag,) = struct.unpack("<B", cur.take(1))
    if planes_flag not in (0, 1):
        raise VersionUnsupported(
            f"{cur.path}: bad planes flag {planes_flag} in entry '{label}'")
    planes = cur.floats(m * h * w).reshape(m, h, w) if planes_flag else None
    return ContainerEntry(object_id=label, speckle_seed=seed,
                          distribution=distribution, ground_truth=ground_truth,
                          buckets=buckets, planes=planes)


def read_container(path) -> Container:
    """Read and decode a GFB1 file."""
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read container {path}: {exc}") from exc
    cur = _Cursor(data, path)
    magic, version, height, width, m = _HEADER.unpack(cur.take(_HEADER.size))
    if magic != MAGIC:
        raise BadMagic(f"{path}: magic {magic!r} is not {MAGIC!r}")
    if version != VERSION:
        raise VersionUnsupported(f"{path}: container version {version} unsupported")
    container = Container(height=height, width=width, m=m)
    while cur.remaining:
        container.entries.append(_decode_entry(cur, height, width, m))
    return container


def entry_from_gf(gf: GroupFrame, ground_truth, include_planes=False) -> ContainerEntry:
    """Package a group frame and its ground truth as a container entry."""
    truth = np.asarray(getattr(ground_truth, "data", ground_truth), dtype=np.float64)
    return ContainerEntry(
        object_id=gf.object_id,
        speckle_seed=gf.speckle_seed,
        distribution=gf.distribution,
        ground_truth=truth,
        buckets=gf.buckets,
        planes=gf.planes if include_planes else None,
    )


def gf_from_entry(entry: ContainerEntry) -> GroupFrame:
    """Rebuild a group frame from a container entry.

    Entries without stored planes keep only the seed; the group frame
    regenerates its patterns on demand.
    """
    return GroupFrame(
        buckets=entry.buckets,
        speckle_seed=entry.speckle_seed,
        distribution=entry.distribution,
        object_id=entry.object_id,
        explicit_planes=entry.planes,
        image_shape=entry.ground_truth.shape,
    )


def group_entries(entries) -> list:
    """Group consecutive same-seed entries into batch group frames.

    A rotation dataset writes its frames batch by batch, every frame of
    a batch sharing one speckle seed; this recovers that structure.
    """
    bgfs = []
    frames = []
    for entry in entries:
        if frames and entry.speckle_seed != frames[0].speckle_seed:
            bgfs.append(BatchGroupFrame(frames=tuple(frames),
                                        speckle_seed=frames[0].speckle_seed,
                                        batch_index=len(bgfs)))
            frames = []
        frames.append(gf_from_entry(entry))
    if frames:
        bgfs.append(BatchGroupFrame(frames=tuple(frames),
                                    speckle_seed=frames[0].speckle_seed,
                                    batch_index=len(bgfs)))
    return bgfs
