"""Synthesizes digit training datasets in the GFB1 container format.

Every entry is one simulated measurement: a rendered digit, the bucket
value of each illumination pattern, and the seed that regenerates the
patterns. All entries of a run share one speckle seed, i.e. one fixed
measurement operator; the trainer batches same-seed entries together,
and a shared operator is what makes a small network trainable at low
sampling ratios. Buckets are the plain dot products of the object with
the patterns, exactly as the producing toolkit computes them.
"""

from __future__ import annotations

import numpy as np

from .digits import render_digit
from .errors import BadShape
from .gfb import Entry, gen_patterns, write_gfb

__all__ = ["make_entries", "write_dataset"]


def make_entries(n: int, size: int, m: int, seed: int, distribution: int = 0,
                 label_prefix: str = "d") -> tuple:
    """Render n digit entries measured under one shared speckle set.

    Returns (entries, patterns); digit classes cycle 0-9 and the warp
    rng is derived from `seed`, so identical arguments reproduce the
    identical dataset.
    """
    if n < 1:
        raise BadShape(f"need at least one entry, got {n}")
    if m < 1:
        raise BadShape(f"need at least one sample, got {m}")
    speckle_seed = seed & ((1 << 64) - 1)
    patterns = gen_patterns(speckle_seed, m, size, size, distribution)
    flat = patterns.reshape(m, -1)
    rng = np.random.default_rng(seed)
    entries = []
    for i in range(n):
        d = i % 10
        truth = render_digit(d, size, rng)
        buckets = flat @ truth.ravel()
        entries.append(Entry(
            label=f"{label_prefix}{d}_{i:05d}",
            speckle_seed=speckle_seed,
            distribution=distribution,
            ground_truth=truth.astype(np.float32),
            buckets=buckets.astype(np.float32),
        ))
    return entries, patterns


def write_dataset(out, n: int, size: int, m: int, seed: int, distribution: int = 0,
                  heldout: int = 0, heldout_out=None) -> dict:
    """Write a training file and, optionally, a held-out file.

    The last `heldout` rendered digits go to `heldout_out`; both files
    share the speckle seed so they describe the same measurement
    operator. Returns a small summary dict.
    """
    if heldout and heldout_out is None:
        raise ValueError("heldout > 0 needs heldout_out")
    if heldout and not 0 < heldout < n:
        raise BadShape(f"heldout must lie in [0, {n}), got {heldout}")
    entries, _ = make_entries(n, size, m, seed, distribution)
    train = entries[:n - heldout]
    write_gfb(out, train, size, size, m)
    summary = {"train": len(train), "heldout": heldout, "size": size, "m": m,
               "sampling_ratio": m / float(size * size)}
    if heldout:
        write_gfb(heldout_out, entries[n - heldout:], size, size, m)
    return summary
