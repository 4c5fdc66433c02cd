"""Dataset assembly and batching for training.

Entries are kept as compact arrays (float32 truths and buckets); the
network input for an entry is its plane stack with the bucket weights
standardized per entry, which removes the object-brightness scale and
centers the stack so its channel mean is the correlation image. Plane
stacks are built on demand from a small per-seed pattern cache, so
files that store only seeds stay cheap in memory no matter how large
they are.

Batching treats same-seed runs of entries as units: a batch never
interleaves entries of different seeds unless a run is smaller than
the batch, which keeps the measurement operator homogeneous within a
mini-batch whenever the file layout allows it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetTooSmall, ShapeMismatch
from .gfb import Dataset, gen_patterns, read_gfb

__all__ = ["TrainingData", "load_training_data", "split_indices", "iter_batches",
           "check_compatible"]

_EPS = 1e-12
_CACHE_SEEDS = 8  # pattern stacks kept alive; one suffices for shared-seed files


@dataclass
class TrainingData:
    """Arrays of one GFB1 file plus the pattern cache to expand them."""

    height: int
    width: int
    m: int
    labels: list
    seeds: np.ndarray
    distributions: np.ndarray
    truths: np.ndarray
    buckets: np.ndarray
    planes: list = None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.truths.shape[0]

    def patterns_for(self, idx: int) -> np.ndarray:
        """The (m, h, w) float32 pattern stack of entry idx's seed."""
        key = (int(self.seeds[idx]), int(self.distributions[idx]))
        if key not in self._cache:
            if len(self._cache) >= _CACHE_SEEDS:
                self._cache.pop(next(iter(self._cache)))
            stack = gen_patterns(key[0], self.m, self.height, self.width, key[1])
            self._cache[key] = stack.astype(np.float32)
        return self._cache[key]

    def gf_input(self, indices) -> np.ndarray:
        """Standardized (B, m, h, w) float32 network input for the entries.

        Plane i enters as (S_i - mean S) / std S times its pattern, so
        the channel mean of the stack is already the correlation
        reconstruction and the per-plane deviations carry the rest of
        the measurement information. Entries with stored planes divide
        the bucket out of each plane first, which is exact because a
        stored plane is bucket times pattern by construction.
        """
        indices = np.atleast_1d(np.asarray(indices, dtype=np.intp))
        out = np.empty((indices.size, self.m, self.height, self.width),
                       dtype=np.float32)
        for row, idx in enumerate(indices):
            s = self.buckets[idx].astype(np.float64)
            weight = (s - s.mean()) / (s.std() + _EPS)
            if self.planes is not None and self.planes[idx] is not None:
                # recover the pattern scale: plane_i / S_i, guarding S_i == 0
                safe = np.where(np.abs(s) > _EPS, s, 1.0)
                factor = np.where(np.abs(s) > _EPS, weight / safe, 0.0)
                np.multiply(self.planes[idx],
                            factor.astype(np.float32)[:, None, None],
                            out=out[row])
            else:
                np.multiply(self.patterns_for(idx),
                            weight.astype(np.float32)[:, None, None],
                            out=out[row])
        return out


def load_training_data(path) -> TrainingData:
    """Read a GFB1 file into training arrays."""
    ds: Dataset = read_gfb(path)
    if not ds.entries:
        raise DatasetTooSmall(f"{path} holds no entries")
    truths = np.stack([e.ground_truth for e in ds.entries]).astype(np.float32)
    buckets = np.stack([e.buckets for e in ds.entries]).astype(np.float32)
    planes = [e.planes for e in ds.entries]
    if all(p is None for p in planes):
        planes = None
    return TrainingData(
        height=ds.height, width=ds.width, m=ds.m,
        labels=[e.label for e in ds.entries],
        seeds=np.array([e.speckle_seed for e in ds.entries], dtype=np.uint64),
        distributions=np.array([e.distribution for e in ds.entries], dtype=np.uint8),
        truths=truths, buckets=buckets, planes=planes)


def split_indices(n: int, val_fraction: float, seed: int) -> tuple:
    """Deterministic train/validation split of n entries.

    Returns (train_idx, val_idx); validation gets at least one entry,
    so n must be at least 2.
    """
    if n < 2:
        raise DatasetTooSmall(f"need at least 2 entries to split, got {n}")
    if not 0.0 < val_fraction < 1.0:
        raise ValueError(f"val_fraction must lie in (0, 1), got {val_fraction}")
    perm = np.random.default_rng(seed).permutation(n)
    n_val = max(1, int(round(n * val_fraction)))
    if n_val >= n:
        n_val = n - 1
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def _seed_runs(seeds: np.ndarray, indices: np.ndarray) -> list:
    runs, run = [], [indices[0]]
    for idx in indices[1:]:
        if seeds[idx] == seeds[run[-1]]:
            run.append(idx)
        else:
            runs.append(run)
            run = [idx]
    runs.append(run)
    return runs


def iter_batches(seeds: np.ndarray, indices: np.ndarray, batch_size: int,
                 rng: np.random.Generator):
    """Yield index batches, keeping same-seed runs contiguous.

    Runs are shuffled as units and entries shuffle within their run, so
    epochs differ while every batch stays seed-homogeneous whenever run
    lengths allow.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    indices = np.asarray(indices, dtype=np.intp)
    if indices.size == 0:
        raise DatasetTooSmall("cannot batch zero entries")
    runs = _seed_runs(seeds, indices)
    order = rng.permutation(len(runs))
    flat = np.concatenate([rng.permutation(np.asarray(runs[i], dtype=np.intp))
                           for i in order])
    for start in range(0, flat.size, batch_size):
        yield flat[start:start + batch_size]


def check_compatible(data: TrainingData, h: int, w: int, m: int) -> None:
    """Raise unless the file's geometry matches the model's."""
    if (data.height, data.width, data.m) != (h, w, m):
        raise ShapeMismatch(
            f"dataset is {data.height}x{data.width} m={data.m}, "
            f"model wants {h}x{w} m={m}")
