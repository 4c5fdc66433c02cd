"""Inference and per-entry quality evaluation.

Reconstructions are projected onto the nonnegative orthant before
scoring; ground truths are intensity images, so the projection never
moves an output away from the truth. Scores follow the producer's
conventions: both the ground truth and the network output are min-max
mapped onto [0, 255] before PSNR and SSIM. Reports serialize infinite
PSNR as the string "inf" so they stay valid JSON.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np
import torch

from .data import TrainingData
from .metrics import psnr, ssim, to_scale255
from .model import GFNet

__all__ = ["infer", "evaluate", "raw_gi", "write_report"]

_EPS = 1e-12


def infer(model: GFNet, planes: np.ndarray, buckets: np.ndarray) -> np.ndarray:
    """Network reconstruction of one entry from its raw plane stack.

    Applies the same per-entry standardization as the training
    pipeline: plane i is weighted by (S_i - mean S) / std S with the
    bucket divided back out of the stored plane. The output is clipped
    at zero, the reconstruction being an intensity image.
    """
    s = np.asarray(buckets, dtype=np.float64).ravel()
    weight = (s - s.mean()) / (s.std() + _EPS)
    safe = np.where(np.abs(s) > _EPS, s, 1.0)
    factor = np.where(np.abs(s) > _EPS, weight / safe, 0.0)
    x = np.asarray(planes, dtype=np.float32) * factor.astype(np.float32)[:, None, None]
    model.eval()
    with torch.no_grad():
        out = model(torch.from_numpy(x).unsqueeze(0))
    return np.maximum(out[0, 0].numpy().astype(np.float64), 0.0)


def raw_gi(patterns: np.ndarray, buckets: np.ndarray) -> np.ndarray:
    """Correlation reconstruction baseline from patterns and buckets."""
    buckets = np.asarray(buckets, dtype=np.float64)
    patterns = np.asarray(patterns, dtype=np.float64)
    return (np.tensordot(buckets, patterns, axes=1) / buckets.size
            - buckets.mean() * patterns.mean(axis=0))


def evaluate(model: GFNet, data: TrainingData, indices=None,
             batch_size: int = 16) -> list:
    """Score every requested entry; returns [{entry_id, psnr_db, ssim}]."""
    if indices is None:
        indices = np.arange(data.n)
    indices = np.asarray(indices, dtype=np.intp)
    torch.set_flush_denormal(True)  # trained weights may sit in denormal range
    model.eval()
    results = []
    for start in range(0, indices.size, batch_size):
        batch = indices[start:start + batch_size]
        x = torch.from_numpy(data.gf_input(batch))
        with torch.no_grad():
            out = model(x).numpy()
        for row, idx in enumerate(batch):
            truth = to_scale255(data.truths[idx].astype(np.float64))
            test = to_scale255(np.maximum(out[row, 0].astype(np.float64), 0.0))
            results.append({"entry_id": data.labels[idx],
                            "psnr_db": psnr(truth, test),
                            "ssim": ssim(truth, test)})
    return results


def _jsonable(value: float):
    return "inf" if math.isinf(value) else value


def write_report(path, results) -> None:
    """Write the evaluation report as JSON with summary means."""
    psnrs = [r["psnr_db"] for r in results]
    ssims = [r["ssim"] for r in results]
    doc = {
        "entries": [{"entry_id": r["entry_id"],
                     "psnr_db": _jsonable(r["psnr_db"]),
                     "ssim": r["ssim"]} for r in results],
        "mean_psnr_db": _jsonable(float(np.mean(psnrs))) if results else None,
        "mean_ssim": float(np.mean(ssims)) if results else None,
    }
    tmp = str(path) + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, indent=2)
    os.replace(tmp, path)
