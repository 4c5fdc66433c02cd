"""Binary (P5) PGM bridge.

Same conventions as the dataset producer: writes rescale [min, max]
onto [0, 255] (constant images write as zeros), reads return raw 8-bit
values as float64. Only maxval 255 is supported.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ContainerFormatError

__all__ = ["read_pgm", "write_pgm"]


def write_pgm(path, img: np.ndarray) -> None:
    data = np.asarray(img, dtype=np.float64)
    lo, hi = data.min(), data.max()
    scaled = (data - lo) / (hi - lo) if hi > lo else np.zeros_like(data)
    raster = np.round(scaled * 255.0).astype(np.uint8)
    h, w = raster.shape
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(raster.tobytes())
    os.replace(tmp, path)


def _tokens(fh, n):
    out = []
    while len(out) < n:
        ch = fh.read(1)
        if not ch:
            raise ContainerFormatError("PGM header ended early")
        if ch.isspace():
            continue
        if ch == b"#":  # comment runs to end of line
            while ch and ch != b"\n":
                ch = fh.read(1)
            continue
        tok = ch
        while True:
            ch = fh.read(1)
            if not ch or ch.isspace():
                break
            tok += ch
        out.append(tok)
    return out


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, w, h, maxval = _tokens(fh, 4)
        if magic != b"P5":
            raise ContainerFormatError(f"{path}: not a binary PGM (magic {magic!r})")
        w, h, maxval = int(w), int(h), int(maxval)
        if maxval != 255:
            raise ContainerFormatError(f"{path}: only maxval 255 supported, got {maxval}")
        raster = fh.read(w * h)
    if len(raster) != w * h:
        raise ContainerFormatError(f"{path}: raster truncated")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w).astype(np.float64)
