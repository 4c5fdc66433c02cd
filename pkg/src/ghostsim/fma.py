"""Rotation estimation by correlation search and frame merging.

The correlation score between two images as a function of a trial
angle peaks at their true relative rotation; searched over a grid it
recovers how fast an object was spinning. Merging then counter-rotates
every frame of a batch (and across batches) onto a common base
orientation and concatenates the samples into one motion-compensated
group frame, which reconstructs without rotational blur.

Trial-angle convention: delta is the angle of g2's content relative to
g1 (CCW positive), so the score is evaluated by rotating g2 back by
-delta. A later frame of an object spinning CCW therefore correlates
best at a positive delta.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    BadBase,
    ConstantImage,
    IndexOutOfRange,
    InvalidBGF,
    NonPositiveParameter,
    TooFewSamples,
)
from .forward import BatchGroupFrame
from .imagecore import _arrays, normalize_zscore, rotate_stack
from .reconstruct import GhostImage, gi_many
from .speckle import gen_speckle_set

__all__ = [
    "AngleGrid",
    "AngleEstimate",
    "MergedGroupFrame",
    "PairPolicy",
    "ccg",
    "ccf",
    "estimate_angle_gi",
    "estimate_frame_angle",
    "estimate_alpha",
    "estimate_alpha_from_images",
    "fma_merge_within",
    "fma_merge_across",
    "resolve_workers",
]


@dataclass(frozen=True)
class AngleGrid:
    """Uniform search grid of trial angles in degrees."""

    min_deg: float
    max_deg: float
    step_deg: float

    def __post_init__(self):
        if not self.step_deg > 0:
            raise NonPositiveParameter(f"grid step must be > 0, got {self.step_deg}")
        if self.min_deg > self.max_deg:
            raise ValueError(f"grid min {self.min_deg} exceeds max {self.max_deg}")

    def candidates(self) -> np.ndarray:
        n = int(math.floor((self.max_deg - self.min_deg) / self.step_deg + 1e-9)) + 1
        return self.min_deg + self.step_deg * np.arange(n)

    def scaled(self, factor: float) -> "AngleGrid":
        """The same grid with all angles multiplied by factor."""
        return AngleGrid(self.min_deg * factor, self.max_deg * factor,
                         self.step_deg * factor)


@dataclass
class AngleEstimate:
    """Result of a correlation search: best angle plus the full curve."""

    angle_deg: float
    score: float
    curve: list  # (candidate_deg, score) pairs


class PairPolicy(str, Enum):
    """What image represents a group frame inside the frame-level search.

    FRAME_GI correlates per-frame ghost images (each GF reconstructed
    from its own buckets with the batch's shared speckle set); this is
    the default and the only policy that carries rotation information,
    because raw planes are scalar multiples of the shared patterns and
    normalization erases the scalar. PLANES and PLANE_MEAN are kept for
    diagnostics of exactly that effect.
    """

    FRAME_GI = "frame_gi"
    PLANES = "planes"
    PLANE_MEAN = "plane_mean"


@dataclass
class MergedGroupFrame:
    """Motion-compensated concatenation of group frames.

    provenance[j] = (batch_index, frame_index, applied_rotation_deg) for
    plane j; base is the (batch, frame) whose orientation everything was
    rotated onto.
    """

    planes: np.ndarray
    buckets: np.ndarray
    provenance: list
    base: tuple

    def __post_init__(self):
        self.planes = np.asarray(self.planes, dtype=np.float64)
        self.buckets = np.asarray(self.buckets, dtype=np.float64).ravel()
        if not (self.planes.shape[0] == self.buckets.shape[0] == len(self.provenance)):
            raise InvalidBGF("merged planes, buckets and provenance must align")


def resolve_workers(workers=None) -> int:
    """Worker count: explicit argument, else GHOSTSIM_THREADS (0 = auto)."""
    if workers is None:
        env = os.environ.get("GHOSTSIM_THREADS", "").strip()
        if not env:
            return 1
        try:
            workers = int(env)
        except ValueError:
            return 1
    if workers == 0:
        return os.cpu_count() or 1
    return max(1, int(workers))


def ccg(g1, g2, delta_theta: float) -> float:
    """Normalized correlation of g1 with g2 counter-rotated by delta_theta.

    Both operands are z-score normalized, g2 after its rotation, so the
    score is a normalized inner product bounded by 1.
    """
    a, b = _arrays(g1, g2)
    na = normalize_zscore(a).data
    nb = normalize_zscore(rotate_stack(b, -delta_theta)).data
    return float(np.sum(na * nb))


def ccf(f1, f2, delta_alpha: float) -> float:
    """Frame-level correlation score; same computation as ccg.

    Intended for bucket-measurement planes of two group frames inside
    one batch (same pattern index); see PairPolicy for why raw planes
    are blind to rotation.
    """
    return ccg(f1, f2, delta_alpha)


def _normalize_rows(flat: np.ndarray) -> np.ndarray:
    centered = flat - flat.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    if np.any(norms == 0.0):
        raise ConstantImage("constant operand in correlation sweep")
    return centered / norms[:, None]


def _sweep_serial(refs_n: np.ndarray, movs: np.ndarray, cands: np.ndarray) -> np.ndarray:
    """Scores (n_candidates, n_pairs); refs_n rows already normalized."""
    n_pairs = movs.shape[0]
    out = np.empty((cands.shape[0], n_pairs))
    for ci, d in enumerate(cands):
        rot = rotate_stack(movs, -float(d))
        flat = _normalize_rows(rot.reshape(n_pairs, -1))
        out[ci] = np.einsum("ij,ij->i", refs_n, flat)
    return out


def _sweep_chunk(args):
    return _sweep_serial(*args)


def _sweep(refs: np.ndarray, movs: np.ndarray, cands: np.ndarray, workers=None) -> np.ndarray:
    """Grid sweep over candidate angles, parallel across candidates."""
    refs = np.asarray(refs, dtype=np.float64)
    movs = np.asarray(movs, dtype=np.float64)
    refs_n = _normalize_rows(refs.reshape(refs.shape[0], -1))
    nworkers = resolve_workers(workers)
    if nworkers <= 1 or cands.shape[0] < 2 * nworkers:
        return _sweep_serial(refs_n, movs, cands)
    chunks = np.array_split(cands, nworkers)
    with ProcessPoolExecutor(max_workers=nworkers) as ex:
        parts = list(ex.map(_sweep_chunk, [(refs_n, movs, c) for c in chunks if c.size]))
    return np.concatenate(parts, axis=0)


def _argmax_tiebreak(cands: np.ndarray, scores: np.ndarray):
    """Index of the best score; ties go to the smallest |angle|."""
    best = float(scores.max())
    tied = np.flatnonzero(scores >= best - 1e-12)
    order = sorted(tied, key=lambda i: (abs(cands[i]), cands[i]))
    return order[0], best


def _curve(cands: np.ndarray, scores: np.ndarray) -> list:
    return [(float(c), float(s)) for c, s in zip(cands, scores)]


def estimate_angle_gi(g1, g2, grid: AngleGrid, workers=None) -> AngleEstimate:
    """Argmax correlation search between two ghost images."""
    a = g1.image if isinstance(g1, GhostImage) else g1
    b = g2.image if isinstance(g2, GhostImage) else g2
    x, y = _arrays(a, b)
    cands = grid.candidates()
    scores = _sweep(x[None], y[None], cands, workers=workers)[:, 0]
    idx, best = _argmax_tiebreak(cands, scores)
    return AngleEstimate(angle_deg=float(cands[idx]), score=best,
                         curve=_curve(cands, scores))


def _batch_speckles(bgf: BatchGroupFrame):
    gf0 = bgf.frames[0]
    if gf0.speckles is not None:
        return gf0.speckles
    h, w = gf0.image_shape
    return gen_speckle_set(bgf.speckle_seed, gf0.m, h, w, gf0.distribution)


def estimate_frame_angle(bgf: BatchGroupFrame, gf_a: int, gf_b: int, grid: AngleGrid,
                         policy=PairPolicy.FRAME_GI, max_pairs=None,
                         workers=None) -> AngleEstimate:
    """Per-frame rotation angle from frame pairs spanning v = gf_b - gf_a.

    Each available pair (gf_a + i, gf_b + i) spans v frames; the mean of
    the per-pair argmax angles divided by v is the angle between two
    adjacent frames. The grid addresses the spanned angle, so the
    returned alpha resolves to grid.step_deg / v.
    """
    n = bgf.n_frames
    if not (0 <= gf_a < n and 0 <= gf_b < n):
        raise IndexOutOfRange(f"frame pair ({gf_a}, {gf_b}) outside batch of {n}")
    if gf_a >= gf_b:
        raise IndexOutOfRange(f"gf_a must precede gf_b, got ({gf_a}, {gf_b})")
    v = gf_b - gf_a
    policy = PairPolicy(policy)
    cands = grid.candidates()

    if policy is PairPolicy.FRAME_GI:
        n_pairs = min(v, n - gf_b)
        if max_pairs is not None:
            n_pairs = max(1, min(n_pairs, int(max_pairs)))
        speckles = _batch_speckles(bgf)
        rows_a = np.stack([bgf.frames[gf_a + i].buckets for i in range(n_pairs)])
        rows_b = np.stack([bgf.frames[gf_b + i].buckets for i in range(n_pairs)])
        refs = gi_many(speckles, rows_a)
        movs = gi_many(speckles, rows_b)
    elif policy is PairPolicy.PLANES:
        refs = bgf.frames[gf_a].planes
        movs = bgf.frames[gf_b].planes
        if max_pairs is not None:
            refs = refs[: int(max_pairs)]
            movs = movs[: int(max_pairs)]
    else:
        refs = bgf.frames[gf_a].planes.mean(axis=0)[None]
        movs = bgf.frames[gf_b].planes.mean(axis=0)[None]

    scores = _sweep(refs, movs, cands, workers=workers)
    pair_angles = np.array([cands[_argmax_tiebreak(cands, scores[:, j])[0]]
                            for j in range(scores.shape[1])])
    mean_scores = scores.mean(axis=1)
    alpha = float(pair_angles.mean()) / v
    return AngleEstimate(angle_deg=alpha, score=float(mean_scores.max()),
                         curve=_curve(cands, mean_scores))


def _cap_pairs(refs: np.ndarray, movs: np.ndarray, max_pairs):
    if max_pairs is not None and refs.shape[0] > int(max_pairs):
        pick = np.linspace(0, refs.shape[0] - 1, int(max_pairs)).round().astype(int)
        return refs[pick], movs[pick]
    return refs, movs


def _mean_curve_estimate(refs, movs, grid: AngleGrid, v: int,
                         workers=None) -> AngleEstimate:
    """Argmax of the pair-averaged curve; candidates and result per-frame.

    The sweep runs on span angles (per-frame candidate x v); averaging
    the curves over pairs before the argmax pools the common rotation
    signal coherently while pair-to-pair estimation noise cancels, so
    the result is a grid candidate exactly.
    """
    cands_pf = grid.candidates()
    scores = _sweep(refs, movs, cands_pf * v, workers=workers)
    mean_scores = scores.mean(axis=1)
    idx, best = _argmax_tiebreak(cands_pf, mean_scores)
    return AngleEstimate(angle_deg=float(cands_pf[idx]), score=best,
                         curve=_curve(cands_pf, mean_scores))


def estimate_alpha(bgfs, grid: AngleGrid, policy=PairPolicy.FRAME_GI,
                   max_pairs=100, workers=None) -> AngleEstimate:
    """Per-frame rotation angle for a whole acquisition.

    grid addresses the per-frame angle; the search itself runs on wider
    spans, scaling the candidates up and the argmax back down, because
    a span of v frames moves the content v times further than one
    frame and is that much easier to resolve.

    With two or more batches the pairs are same-position frames of
    consecutive batches (span = frames per batch). Their ghost images
    come from independent speckle sets, so their estimation noise is
    uncorrelated and cannot bias the score toward small angles the way
    same-set pairs do. With a single batch this falls back to sliding
    same-set pairs spanning half the batch.

    Unlike estimate_frame_angle, which averages per-pair argmax angles,
    this pipeline estimator takes the argmax of the pair-averaged
    curve; at low sampling that is considerably more robust and the
    estimate always lands on the given grid.
    """
    bgfs = list(bgfs)
    if not bgfs:
        raise InvalidBGF("no batches to estimate from")
    policy = PairPolicy(policy)

    if len(bgfs) == 1 or policy is not PairPolicy.FRAME_GI:
        bgf = bgfs[0]
        if bgf.n_frames < 2:
            raise TooFewSamples("angle estimation needs at least 2 frames")
        if policy is not PairPolicy.FRAME_GI:
            v = max(1, bgf.n_frames // 2)
            est = estimate_frame_angle(bgf, 0, v, grid.scaled(v), policy=policy,
                                       max_pairs=max_pairs, workers=workers)
            return AngleEstimate(est.angle_deg, est.score,
                                 [(c / v, s) for c, s in est.curve])
        v = max(1, bgf.n_frames // 2)
        speckles = _batch_speckles(bgf)
        gis = gi_many(speckles, np.stack([gf.buckets for gf in bgf.frames]))
        refs, movs = _cap_pairs(gis[:-v], gis[v:], max_pairs)
        return _mean_curve_estimate(refs, movs, grid, v, workers=workers)

    v = bgfs[0].n_frames
    for bgf in bgfs:
        if bgf.n_frames != v:
            raise InvalidBGF("cross-batch pairing needs equal frames per batch")
    gis = [gi_many(_batch_speckles(bgf),
                   np.stack([gf.buckets for gf in bgf.frames]))
           for bgf in bgfs]
    refs = np.concatenate(gis[:-1], axis=0)
    movs = np.concatenate(gis[1:], axis=0)
    refs, movs = _cap_pairs(refs, movs, max_pairs)
    return _mean_curve_estimate(refs, movs, grid, v, workers=workers)


def estimate_alpha_from_images(images, v: int, grid: AngleGrid, max_pairs=None,
                               workers=None) -> AngleEstimate:
    """Per-frame angle from explicit per-frame reconstructions.

    The frame-level estimator in its noiseless limit: with unlimited
    samples a ghost image converges to the frame content up to an
    affine intensity map, which the z-score inside the correlation
    removes, so feeding the true frame images (or any external
    high-quality reconstructions) exercises the same sliding-pair
    machinery without sampling noise. Pairs are (k, k + v); grid is
    per-frame as in estimate_alpha.
    """
    stack = np.stack([np.asarray(getattr(im, "data", im), dtype=np.float64)
                      for im in images])
    if stack.ndim != 3:
        raise IndexOutOfRange("images must be a sequence of 2-D frames")
    n = stack.shape[0]
    if not 1 <= v < n:
        raise IndexOutOfRange(f"span {v} needs at least {v + 1} of {n} frames")
    refs, movs = _cap_pairs(stack[:-v], stack[v:], max_pairs)
    return _mean_curve_estimate(refs, movs, grid, v, workers=workers)


def fma_merge_within(bgf: BatchGroupFrame, alpha_deg: float) -> MergedGroupFrame:
    """Counter-rotate every frame of one batch onto frame 0 and concatenate."""
    if not isinstance(bgf, BatchGroupFrame) or bgf.n_frames < 1:
        raise InvalidBGF("fma_merge_within needs a nonempty BatchGroupFrame")
    return fma_merge_across([bgf], alpha_deg, base=(0, 0))


def fma_merge_across(bgfs, alpha_deg: float, base=(0, 0)) -> MergedGroupFrame:
    """Counter-rotate all frames of all batches onto one base frame.

    The rotation applied to a frame is -(global index - base global
    index) * alpha_deg, global indices counting frames across the given
    batches in order. base = (position in bgfs, frame within it).
    """
    bgfs = list(bgfs)
    if not bgfs:
        raise InvalidBGF("no batches to merge")
    first = bgfs[0].frames[0]
    for bgf in bgfs:
        if not isinstance(bgf, BatchGroupFrame):
            raise InvalidBGF("fma_merge_across expects BatchGroupFrame items")
        if bgf.m != first.m or bgf.frames[0].image_shape != first.image_shape:
            raise InvalidBGF("batches disagree in m or image size")
    base_batch, base_frame = int(base[0]), int(base[1])
    if not (0 <= base_batch < len(bgfs) and 0 <= base_frame < bgfs[base_batch].n_frames):
        raise BadBase(f"base {base} does not index an existing frame")
    offsets = np.cumsum([0] + [bgf.n_frames for bgf in bgfs[:-1]])
    g_base = offsets[base_batch] + base_frame

    planes_out, buckets_out, provenance = [], [], []
    for b, bgf in enumerate(bgfs):
        for k, gf in enumerate(bgf.frames):
            angle = -(offsets[b] + k - g_base) * alpha_deg
            planes_out.append(rotate_stack(gf.planes, angle))
            buckets_out.append(gf.buckets)
            provenance.extend([(bgf.batch_index, k, angle)] * gf.m)
    return MergedGroupFrame(
        planes=np.concatenate(planes_out, axis=0),
        buckets=np.concatenate(buckets_out),
        provenance=provenance,
        base=(bgfs[base_batch].batch_index, base_frame),
    )
