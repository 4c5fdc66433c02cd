"""Quality metrics matching the dataset producer's conventions.

PSNR against a 255 peak with math.inf for identical images; SSIM with
an 11x11 Gaussian window (sigma 1.5, K1 0.01, K2 0.03, L 255) and the
5-pixel border excluded from the mean. Reported scores are exchanged
with the producer's metrics tool, so the arithmetic here must agree
with it to well below 1e-6 on identical inputs.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import gaussian_filter

__all__ = ["psnr", "ssim", "to_scale255"]

_SIGMA = 1.5
_TRUNCATE = 3.5  # radius int(3.5 * 1.5 + 0.5) = 5, i.e. an 11x11 window
_WIN = 11
_K1 = 0.01
_K2 = 0.03
_L = 255.0


def to_scale255(img: np.ndarray) -> np.ndarray:
    """Min-max map onto [0, 255] for metric evaluation."""
    data = np.asarray(img, dtype=np.float64)
    lo, hi = data.min(), data.max()
    if hi == lo:
        return np.zeros_like(data)
    return (data - lo) / (hi - lo) * 255.0


def psnr(ref: np.ndarray, test: np.ndarray) -> float:
    a = np.asarray(ref, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(_L * _L / mse)


def ssim(ref: np.ndarray, test: np.ndarray) -> float:
    a = np.asarray(ref, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)

    def f(x):
        return gaussian_filter(x, sigma=_SIGMA, truncate=_TRUNCATE)

    ux, uy = f(a), f(b)
    vx = f(a * a) - ux * ux
    vy = f(b * b) - uy * uy
    vxy = f(a * b) - ux * uy
    c1 = (_K1 * _L) ** 2
    c2 = (_K2 * _L) ** 2
    s = ((2.0 * ux * uy + c1) * (2.0 * vxy + c2)) / (
        (ux * ux + uy * uy + c1) * (vx + vy + c2))
    pad = (_WIN - 1) // 2
    return float(s[pad:-pad, pad:-pad].mean())
