"""Binary (P5) PGM read/write.

PGM is the exchange format for single images at the CLI boundary. On
write, intensities are mapped [min, max] -> [0, 255] (a constant image
writes as all zeros, matching normalize_minmax degeneracy); on read,
raw 8-bit values are returned as float64 in [0, 255].
"""

from __future__ import annotations

import os

import numpy as np

from .errors import IoFailure, TruncatedFile
from .imagecore import Image, as_image, normalize_minmax

__all__ = ["read_pgm", "write_pgm"]


def write_pgm(path, img) -> None:
    """Write an image as 8-bit binary PGM, rescaling to the full range."""
    data = normalize_minmax(as_image(img)).data
    raster = np.round(data * 255.0).astype(np.uint8)
    h, w = raster.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    tmp = str(path) + ".tmp"
    try:
        with open(tmp, "wb") as f:
            f.write(header)
            f.write(raster.tobytes())
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write PGM {path}: {exc}") from exc


def _read_tokens(f, n):
    """Read n whitespace-separated header tokens, skipping # comments."""
    tokens = []
    while len(tokens) < n:
        ch = f.read(1)
        if not ch:
            raise TruncatedFile("PGM header ended early")
        if ch.isspace():
            continue
        if ch == b"#":
            while ch and ch != b"\n":
                ch = f.read(1)
            continue
        tok = ch
        while True:
            ch = f.read(1)
            if not ch or ch.isspace():
                break
            tok += ch
        tokens.append(tok)
    return tokens


def read_pgm(path) -> Image:
    """Read an 8-bit binary PGM into an Image with values in [0, 255]."""
    try:
        with open(path, "rb") as f:
            magic = f.read(2)
            if magic != b"P5":
                raise IoFailure(f"{path}: not a binary PGM (magic {magic!r})")
            w, h, maxval = (int(t) for t in _read_tokens(f, 3))
            if maxval <= 0 or maxval > 255:
                raise IoFailure(f"{path}: unsupported maxval {maxval}")
            raster = f.read(w * h)
            if len(raster) < w * h:
                raise TruncatedFile(f"{path}: raster shorter than {w}x{h}")
            data = np.frombuffer(raster, dtype=np.uint8).reshape(h, w)
            return Image(data.astype(np.float64))
    except OSError as exc:
        raise IoFailure(f"cannot read PGM {path}: {exc}") from exc
