"""Image quality metrics: PSNR on the 8-bit scale and SSIM.

Both metrics expect inputs already mapped onto the [0, 255] scale (use
to_scale255 for arbitrary-scale reconstructions). SSIM follows the
canonical parameterization: 11x11 Gaussian window, sigma 1.5,
K1 = 0.01, K2 = 0.03, L = 255, symmetric in its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import TooSmall
from .imagecore import Image, _arrays, as_image, normalize_minmax

__all__ = ["QualityReport", "psnr", "ssim", "to_scale255", "report"]

_SIGMA = 1.5
_TRUNCATE = 3.5  # radius int(3.5 * 1.5 + 0.5) = 5, i.e. an 11x11 window
_WIN = 11
_K1 = 0.01
_K2 = 0.03
_L = 255.0


@dataclass
class QualityReport:
    """PSNR/SSIM scores for one reference/test pair."""

    psnr_db: float
    ssim: float
    pair_id: str = ""


def to_scale255(img) -> Image:
    """Min-max map an image onto [0, 255] for metric evaluation."""
    return Image(normalize_minmax(img).data * 255.0)


def psnr(g0, g) -> float:
    """Peak signal-to-noise ratio in dB against a 255 peak.

    Identical images have zero error; math.inf is returned as the
    sentinel (serialized as the string "inf" in reports).
    """
    a, b = _arrays(g0, g)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(_L * _L / mse)


def ssim(g0, g) -> float:
    """Mean local structural similarity with a Gaussian window."""
    a, b = _arrays(g0, g)
    if a.shape[0] < _WIN or a.shape[1] < _WIN:
        raise TooSmall(f"SSIM needs at least {_WIN}x{_WIN}, got {a.shape}")

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


def report(g0, g, pair_id: str = "") -> QualityReport:
    """Bundle both metrics for one pair."""
    return QualityReport(psnr_db=psnr(g0, g), ssim=ssim(g0, g), pair_id=pair_id)
