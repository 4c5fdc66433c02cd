"""Handwritten-style digit images for training datasets.

A dot-matrix glyph is smoothed and pushed through a random affine warp
(rotation, anisotropic scale, shear, shift) plus a soft threshold, so
every sample of a class looks like a different hand wrote it. Output
is grayscale in [0, 1] on a square canvas, strokes well inside the
border.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import affine_transform, gaussian_filter, zoom

from .errors import BadShape

__all__ = ["render_digit"]

_FONT = {
    0: ("01110", "10001", "10001", "10001", "10001", "10001", "01110"),
    1: ("00100", "01100", "10100", "00100", "00100", "00100", "11111"),
    2: ("01110", "10001", "00001", "00110", "01000", "10000", "11111"),
    3: ("01110", "10001", "00001", "00110", "00001", "10001", "01110"),
    4: ("00010", "00110", "01010", "10010", "11111", "00010", "00111"),
    5: ("11111", "10000", "11110", "00001", "00001", "10001", "01110"),
    6: ("00111", "01000", "10000", "11110", "10001", "10001", "01110"),
    7: ("11111", "00001", "00010", "00100", "00100", "01000", "01000"),
    8: ("01110", "10001", "10001", "01110", "10001", "10001", "01110"),
    9: ("01110", "10001", "10001", "01111", "00001", "00010", "11100"),
}


def _base_glyph(d: int, size: int) -> np.ndarray:
    glyph = np.array([[float(c) for c in row] for row in _FONT[d]])
    # target glyph height around 60% of the canvas, bilinear-smoothed
    target_h = size * 0.6
    block = zoom(glyph, (target_h / 7.0, target_h / 7.0 * 0.9), order=1)
    canvas = np.zeros((size, size))
    r0 = (size - block.shape[0]) // 2
    c0 = (size - block.shape[1]) // 2
    canvas[r0:r0 + block.shape[0], c0:c0 + block.shape[1]] = block
    return canvas


def render_digit(d: int, size: int = 64, rng: np.random.Generator = None) -> np.ndarray:
    """Render digit d (0-9), randomly warped when an rng is given.

    Without an rng the upright glyph is returned; with one, rotation
    up to ~12 degrees, scale, shear, shift, and stroke softness vary
    per call.
    """
    if d not in _FONT:
        raise ValueError(f"digit must be 0..9, got {d}")
    if size < 16:
        raise BadShape(f"digit canvas must be >= 16, got {size}")
    img = _base_glyph(d, size)
    if rng is None:
        return np.clip(gaussian_filter(img, 0.7), 0.0, 1.0)

    theta = np.deg2rad(rng.uniform(-12.0, 12.0))
    sy = np.exp(rng.uniform(-0.12, 0.12))
    sx = np.exp(rng.uniform(-0.12, 0.12))
    shear = rng.uniform(-0.18, 0.18)
    shift = rng.uniform(-4.0, 4.0, size=2)

    c, s = np.cos(theta), np.sin(theta)
    fwd = np.array([[c, -s], [s, c]]) @ np.array([[1.0, shear], [0.0, 1.0]])
    fwd = fwd @ np.diag([sy, sx])
    center = (size - 1) / 2.0
    inv = np.linalg.inv(fwd)
    offset = np.array([center, center]) - inv @ (np.array([center, center]) + shift)
    warped = affine_transform(img, inv, offset=offset, order=1, mode="constant")

    warped = gaussian_filter(warped, rng.uniform(0.5, 1.1))
    # soft threshold keeps stroke edges smooth but the background clean
    t = rng.uniform(0.25, 0.4)
    out = np.clip((warped - t) / (0.85 - t), 0.0, 1.0)
    peak = out.max()
    return out / peak if peak > 0 else out
