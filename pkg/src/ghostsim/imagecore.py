"""Image container and the resampling / normalization primitives.

Everything downstream (bucket simulation, correlation search, frame
merging) is built on the three operations in this module: min-max
normalization, z-score normalization and center rotation with bilinear
interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstantImage, DimensionMismatch, ZeroDimension

__all__ = [
    "Image",
    "as_image",
    "normalize_minmax",
    "normalize_zscore",
    "rotate",
    "rotate_stack",
]


@dataclass(frozen=True)
class Image:
    """A single H x W grayscale image with float64 intensities.

    The pixel buffer is made read-only at construction; operations
    return new Image instances instead of mutating.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if arr.ndim != 2:
            raise ZeroDimension(f"image must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ZeroDimension(f"image dimensions must be >= 1, got {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple:
        return self.data.shape


def as_image(img) -> Image:
    """Coerce an Image or any 2-D array-like into an Image."""
    if isinstance(img, Image):
        return img
    return Image(np.asarray(img))


def _arrays(a, b):
    """Validate a pair of operands and return their arrays."""
    x = as_image(a).data
    y = as_image(b).data
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes differ: {x.shape} vs {y.shape}")
    return x, y


def normalize_minmax(img) -> Image:
    """Map intensities linearly onto [0, 1].

    A constant image has no range and maps to all zeros.
    """
    x = as_image(img).data
    lo = float(x.min())
    hi = float(x.max())
    if hi == lo:
        return Image(np.zeros_like(x))
    return Image((x - lo) / (hi - lo))


def normalize_zscore(img) -> Image:
    """Center to zero mean and scale to unit Frobenius norm.

    This is the normalization used inside the correlation scores; it
    makes the elementwise-product sum a true normalized correlation.

    Raises
    ------
    ConstantImage
        If the input has no variation (correlation undefined).
    """
    x = as_image(img).data
    if x.max() == x.min():
        raise ConstantImage("z-score normalization undefined for a constant image")
    centered = x - x.mean()
    norm = float(np.sqrt(np.sum(centered * centered)))
    return Image(centered / norm)


def _rotation_coords(h: int, w: int, theta_deg: float):
    """Source-pixel coordinates realizing a rotation by theta_deg.

    Positive angles rotate image content counterclockwise in the usual
    display orientation (row 0 on top). Coordinates are computed by the
    inverse map about the geometric center ((W-1)/2, (H-1)/2).
    """
    t = math.radians(theta_deg)
    c, s = math.cos(t), math.sin(t)
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    dy = np.arange(h, dtype=np.float64)[:, None] - cy
    dx = np.arange(w, dtype=np.float64)[None, :] - cx
    xs = cx + c * dx - s * dy
    ys = cy + s * dx + c * dy
    return ys, xs


def _bilinear_gather(stack: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Sample planes at fractional coordinates; outside the grid is 0."""
    h, w = stack.shape[-2:]
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = y0 + 1
    x1 = x0 + 1
    wy = ys - y0
    wx = xs - x0

    out = None
    for yi, xi, wgt in (
        (y0, x0, (1.0 - wy) * (1.0 - wx)),
        (y0, x1, (1.0 - wy) * wx),
        (y1, x0, wy * (1.0 - wx)),
        (y1, x1, wy * wx),
    ):
        valid = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        yc = np.clip(yi, 0, h - 1)
        xc = np.clip(xi, 0, w - 1)
        term = stack[..., yc, xc] * (wgt * valid)
        out = term if out is None else out + term
    return out


def rotate_stack(stack: np.ndarray, theta_deg: float) -> np.ndarray:
    """Rotate every plane of an (..., H, W) array by the same angle."""
    stack = np.asarray(stack, dtype=np.float64)
    if theta_deg % 360.0 == 0.0:
        return stack.copy()
    ys, xs = _rotation_coords(stack.shape[-2], stack.shape[-1], theta_deg)
    return _bilinear_gather(stack, ys, xs)


def rotate(img, theta_deg: float) -> Image:
    """Rotate an image about its center by theta_deg (CCW positive).

    Output pixels are sampled from the input at inverse-rotated
    coordinates with bilinear interpolation; source coordinates outside
    the input map to zero. A multiple of 360 degrees is the bit-exact
    identity.
    """
    x = as_image(img).data
    return Image(rotate_stack(x, theta_deg))
