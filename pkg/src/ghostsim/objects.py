"""Synthetic test objects: blocky digits and smooth blobs.

The digits are a 5x7 glyph font upscaled into the image center, kept
well inside the border so rotations up to 45 degrees stay in frame.
"""

from __future__ import annotations

import numpy as np

from .errors import ZeroDimension
from .imagecore import Image

__all__ = ["digit", "gaussian_blob"]

_FONT = {
    0: ("01110", "10001", "10011", "10101", "11001", "10001", "01110"),
    1: ("00100", "01100", "00100", "00100", "00100", "00100", "01110"),
    2: ("01110", "10001", "00001", "00010", "00100", "01000", "11111"),
    3: ("11111", "00010", "00100", "00010", "00001", "10001", "01110"),
    4: ("00010", "00110", "01010", "10010", "11111", "00010", "00010"),
    5: ("11111", "10000", "11110", "00001", "00001", "10001", "01110"),
    6: ("00110", "01000", "10000", "11110", "10001", "10001", "01110"),
    7: ("11111", "00001", "00010", "00100", "01000", "01000", "01000"),
    8: ("01110", "10001", "10001", "01110", "10001", "10001", "01110"),
    9: ("01110", "10001", "10001", "01111", "00001", "00010", "01100"),
}


def digit(d: int, size: int = 64) -> Image:
    """Render digit d (0-9) as a binary image of the given size."""
    if d not in _FONT:
        raise ValueError(f"digit must be 0..9, got {d}")
    if size < 16:
        raise ZeroDimension(f"digit canvas must be >= 16, got {size}")
    glyph = np.array([[int(c) for c in row] for row in _FONT[d]], dtype=np.float64)
    # scale the 5x7 glyph to roughly half the canvas so rotation keeps it inside
    s = max(1, int(size * 0.55) // 7)
    block = np.kron(glyph, np.ones((s, s)))
    canvas = np.zeros((size, size))
    r0 = (size - block.shape[0]) // 2
    c0 = (size - block.shape[1]) // 2
    canvas[r0 : r0 + block.shape[0], c0 : c0 + block.shape[1]] = block
    return Image(canvas)


def gaussian_blob(size: int = 64, sigma: float = 6.0, center=None, offset=(0.0, 0.0)) -> Image:
    """A smooth anisotropy-free test image: one Gaussian bump.

    offset shifts the bump off center (rows, cols) so rotations are
    observable on an otherwise radially symmetric object.
    """
    if size < 1:
        raise ZeroDimension("blob size must be >= 1")
    cy = (size - 1) / 2.0 + offset[0]
    cx = (size - 1) / 2.0 + offset[1]
    if center is not None:
        cy, cx = center
    y = np.arange(size)[:, None] - cy
    x = np.arange(size)[None, :] - cx
    return Image(np.exp(-(x * x + y * y) / (2.0 * sigma * sigma)))
