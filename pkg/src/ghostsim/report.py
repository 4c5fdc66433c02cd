"""Delimited report output with companion figures.

Every CSV written here gets a rendered PNG next to it (same stem), so a
report directory is readable both by scripts and by eye.
"""

from __future__ import annotations

import csv
import os
import re

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import IoFailure

__all__ = [
    "figure_path",
    "write_csv",
    "save_curve_figure",
    "save_comparison_figure",
    "write_curve_report",
    "write_metrics_report",
    "write_progress_report",
]

_DPI = 120


def figure_path(csv_path, suffix: str = "") -> str:
    """The PNG path that accompanies a CSV report."""
    root, _ = os.path.splitext(os.fspath(csv_path))
    return f"{root}{suffix}.png"


def _slug(text: str) -> str:
    out = re.sub(r"[^\w.-]+", "_", text).strip("_")
    return out or "pair"


def write_csv(path, header, rows):
    """Write one delimited table atomically."""
    path = os.fspath(path)
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write report {path}: {exc}") from exc


def _save(fig, path):
    try:
        fig.savefig(os.fspath(path), dpi=_DPI)
    except OSError as exc:
        raise IoFailure(f"cannot write figure {path}: {exc}") from exc
    finally:
        plt.close(fig)


def save_curve_figure(path, curve, best_deg=None, title="correlation curve"):
    """Plot (candidate angle, score) pairs, marking the argmax."""
    arr = np.asarray(curve, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(arr[:, 0], arr[:, 1], marker=".", lw=1.0)
    if best_deg is not None:
        ax.axvline(best_deg, color="tab:red", lw=1.0, ls="--",
                   label=f"best = {best_deg:g} deg")
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("candidate angle (deg)")
    ax.set_ylabel("correlation score")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def save_comparison_figure(path, reference, test, title=""):
    """Render reference, test and |difference| panels side by side."""
    ref = np.asarray(getattr(reference, "data", reference), dtype=np.float64)
    tst = np.asarray(getattr(test, "data", test), dtype=np.float64)
    fig, axes = plt.subplots(1, 3, figsize=(9.0, 3.2))
    for ax, img, label in zip(axes, (ref, tst, np.abs(ref - tst)),
                              ("reference", "test", "|difference|")):
        ax.imshow(img, cmap="gray")
        ax.set_title(label, fontsize=9)
        ax.set_axis_off()
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    _save(fig, path)


def write_curve_report(csv_path, curve, best_deg=None, title="correlation curve"):
    """CSV of a correlation curve plus its figure; returns both paths."""
    write_csv(csv_path, ["candidate_deg", "score"],
              [(f"{c:.10g}", f"{s:.10g}") for c, s in curve])
    png = figure_path(csv_path)
    save_curve_figure(png, curve, best_deg=best_deg, title=title)
    return os.fspath(csv_path), png


def write_progress_report(csv_path, checkpoints, psnrs, ssims):
    """CSV + figure of reconstruction quality vs sample count."""
    write_csv(csv_path, ["samples", "psnr_db", "ssim"],
              [(c, f"{p:.6f}" if np.isfinite(p) else "inf", f"{s:.6f}")
               for c, p, s in zip(checkpoints, psnrs, ssims)])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(checkpoints, ssims, marker="o", color="tab:blue", label="ssim")
    ax.set_xlabel("samples used")
    ax.set_ylabel("ssim", color="tab:blue")
    ax.grid(True, alpha=0.3)
    ax2 = ax.twinx()
    finite = [p for p in psnrs if np.isfinite(p)]
    ax2.plot(checkpoints, [p if np.isfinite(p) else max(finite, default=0.0)
                           for p in psnrs],
             marker="s", color="tab:orange", label="psnr")
    ax2.set_ylabel("psnr (dB)", color="tab:orange")
    ax.set_title("reconstruction quality vs samples")
    fig.tight_layout()
    png = figure_path(csv_path)
    _save(fig, png)
    return os.fspath(csv_path), png


def write_metrics_report(csv_path, reports, pairs=None):
    """CSV of quality metrics plus one comparison figure per pair.

    reports: QualityReport sequence; pairs: optional matching sequence
    of (reference, test) images to render. Returns the paths written.
    """
    write_csv(csv_path, ["pair_id", "psnr_db", "ssim"],
              [(r.pair_id, f"{r.psnr_db:.6f}" if np.isfinite(r.psnr_db) else "inf",
                f"{r.ssim:.6f}") for r in reports])
    written = [os.fspath(csv_path)]
    if pairs is not None:
        for r, (ref, tst) in zip(reports, pairs):
            png = figure_path(csv_path, suffix=f"_{_slug(r.pair_id)}")
            save_comparison_figure(
                png, ref, tst,
                title=f"{r.pair_id}: psnr={r.psnr_db:.2f} dB ssim={r.ssim:.4f}")
            written.append(png)
    return written
