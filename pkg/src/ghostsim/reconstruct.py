"""Ghost-image reconstruction from buckets and speckle patterns.

The reconstruction is the per-pixel sample covariance between the
bucket sequence and the pattern intensities (population divisor m). Two
independent code paths exist on purpose: gi() works from the speckle
stack, gi_from_gf() works from stored group-frame planes and doubles as
the data-integrity check; their agreement is a standing oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadCheckpoints, CorruptGF, LengthMismatch, TooFewSamples
from .forward import GroupFrame
from .imagecore import Image, normalize_minmax
from .speckle import SpeckleSet, gen_speckle_set

__all__ = ["GhostImage", "gi", "gi_many", "gi_from_gf", "gi_from_planes", "gi_progressive"]

# Plane/bucket consistency tolerance. Container planes are float32, which
# bounds round-trip error near 6e-8 relative; genuine tampering is orders
# of magnitude larger.
_CONSISTENCY_RTOL = 1e-6


@dataclass
class GhostImage:
    """A reconstructed image plus how many samples produced it."""

    image: Image
    m_used: int
    normalized: bool = False

    def normalized_minmax(self) -> "GhostImage":
        """Min-max normalized copy (values in [0, 1])."""
        return GhostImage(normalize_minmax(self.image), self.m_used, normalized=True)


def _validate(m_buckets: int, m_patterns: int):
    if m_buckets != m_patterns:
        raise LengthMismatch(f"{m_buckets} buckets vs {m_patterns} patterns")
    if m_buckets < 2:
        raise TooFewSamples("covariance reconstruction needs at least 2 samples")


def gi(speckles: SpeckleSet, buckets) -> GhostImage:
    """Reconstruct by correlating buckets with pattern intensities.

    T(x, y) = mean_i[S_i * I_i(x, y)] - mean_i[S_i] * mean_i[I_i(x, y)].
    """
    s = np.asarray(buckets, dtype=np.float64).ravel()
    _validate(s.shape[0], speckles.m)
    m = s.shape[0]
    flat = speckles.stack.reshape(m, -1)
    t = (s @ flat) / m - s.mean() * flat.mean(axis=0)
    return GhostImage(Image(t.reshape(speckles.height, speckles.width)), m_used=m)


def gi_many(speckles: SpeckleSet, bucket_rows) -> np.ndarray:
    """Reconstruct one ghost image per row of bucket sequences.

    Returns an (n, H, W) array; row j equals gi(speckles, rows[j]) up
    to BLAS round-off in the last bits.
    """
    rows = np.atleast_2d(np.asarray(bucket_rows, dtype=np.float64))
    _validate(rows.shape[1], speckles.m)
    m = rows.shape[1]
    flat = speckles.stack.reshape(m, -1)
    t = (rows @ flat) / m - np.outer(rows.mean(axis=1), flat.mean(axis=0))
    return t.reshape(rows.shape[0], speckles.height, speckles.width)


def gi_from_gf(gf: GroupFrame) -> GhostImage:
    """Reconstruct from a group frame's planes, validating them first.

    Planes must equal buckets[i] * pattern[i]; any stored plane stack
    that disagrees beyond float32 round-off raises CorruptGF. The result
    matches gi() on the same data to 1e-10 per pixel.
    """
    _validate(gf.m, gf.m)
    speckles = gf.speckles
    if speckles is None:
        h, w = gf.image_shape
        speckles = gen_speckle_set(gf.speckle_seed, gf.m, h, w, gf.distribution)
    planes = gf.explicit_planes
    if planes is None:
        planes = gf.buckets[:, None, None] * speckles.stack
    else:
        expected = gf.buckets[:, None, None] * speckles.stack
        scale = max(float(np.max(np.abs(expected))), 1e-300)
        if float(np.max(np.abs(planes - expected))) > _CONSISTENCY_RTOL * scale:
            raise CorruptGF(f"planes disagree with buckets x patterns for {gf.object_id!r}")
    t = planes.mean(axis=0) - gf.buckets.mean() * speckles.stack.mean(axis=0)
    return GhostImage(Image(t), m_used=gf.m)


def gi_from_planes(planes, buckets) -> GhostImage:
    """Reconstruct directly from stored planes and buckets.

    Recovers each effective pattern as plane/bucket, so it also works
    for motion-compensated planes whose patterns were rotated and can
    no longer be regenerated from a seed. Samples with a zero bucket
    carry no pattern information and are dropped.
    """
    planes = np.asarray(planes, dtype=np.float64)
    s = np.asarray(buckets, dtype=np.float64).ravel()
    if planes.shape[0] != s.shape[0]:
        raise LengthMismatch(f"{s.shape[0]} buckets vs {planes.shape[0]} planes")
    keep = s != 0.0
    if int(keep.sum()) < 2:
        raise TooFewSamples("need at least 2 samples with nonzero buckets")
    planes = planes[keep]
    s = s[keep]
    # pattern mean = mean of planes/s, contracted without materializing it
    pattern_mean = np.einsum("i,ihw->hw", 1.0 / s, planes) / s.shape[0]
    t = planes.mean(axis=0) - s.mean() * pattern_mean
    return GhostImage(Image(t), m_used=int(s.shape[0]))


def gi_progressive(speckles: SpeckleSet, buckets, checkpoints) -> list:
    """Prefix reconstructions at each checkpoint count."""
    s = np.asarray(buckets, dtype=np.float64).ravel()
    _validate(s.shape[0], speckles.m)
    cps = [int(c) for c in checkpoints]
    if not cps:
        raise BadCheckpoints("checkpoint list is empty")
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise BadCheckpoints(f"checkpoints must be strictly ascending, got {cps}")
    if cps[0] < 2 or cps[-1] > s.shape[0]:
        raise BadCheckpoints(f"checkpoints must lie in [2, {s.shape[0]}], got {cps}")
    out = []
    for c in cps:
        prefix = SpeckleSet(stack=speckles.stack[:c], seed=speckles.seed,
                            distribution=speckles.distribution)
        out.append(gi(prefix, s[:c]))
    return out
