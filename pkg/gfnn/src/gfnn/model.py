"""Multi-plane-to-one-image network.

An encoder-decoder with skip connections whose input channels are the
m measurement planes of one group frame and whose output is a single
image. The first convolution ingests the planes directly (a learned
1x1 plane combiner, no embedding before it); the decoder upsamples,
reduces channels, and merges the matching encoder features; a final
1x1 projection emits the image. Every stage is conv + group norm +
rectifier, which keeps training batch-size independent and inference
deterministic.
"""

from __future__ import annotations

import json
import os

import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import BadShape, ShapeMismatch

__all__ = ["GFNet", "build_model", "save_model", "load_model"]

_DEPTH = 3  # pooling stages; 16 is the smallest canvas that survives them


def _pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class GFNet(nn.Module):
    """Encoder-decoder mapping an (m, h, w) plane stack to one image."""

    def __init__(self, h: int, w: int, m: int, width_base: int = 64):
        super().__init__()
        if not (_pow2(h) and _pow2(w)) or h < 16 or w < 16:
            raise BadShape(f"canvas must be powers of two >= 16, got {h}x{w}")
        if m < 1:
            raise BadShape(f"need at least one input plane, got {m}")
        if width_base < 1:
            raise BadShape(f"width_base must be >= 1, got {width_base}")
        self.h, self.w, self.m = h, w, m
        self.width_base = width_base
        wb = width_base
        widths = [wb, 2 * wb, 4 * wb, 8 * wb]

        def block(cin, cout, k):
            # group count divides every width wb >= 8 produces
            groups = 8 if cout % 8 == 0 else 1
            return nn.Sequential(
                nn.Conv2d(cin, cout, k, padding=k // 2),
                nn.GroupNorm(groups, cout),
                nn.ReLU(inplace=True),
            )

        self.stem = block(m, wb, 1)
        self.enc = nn.ModuleList([
            block(widths[0], widths[0], 3),
            block(widths[0], widths[1], 3),
            block(widths[1], widths[2], 3),
        ])
        self.bottleneck = block(widths[2], widths[3], 3)
        # channel reduction after each upsampling, then a merge conv
        self.reduce = nn.ModuleList([
            block(widths[3], widths[2], 1),
            block(widths[2], widths[1], 1),
            block(widths[1], widths[0], 1),
        ])
        self.dec = nn.ModuleList([
            block(2 * widths[2], widths[2], 3),
            block(2 * widths[1], widths[1], 3),
            block(2 * widths[0], widths[0], 3),
        ])
        self.head = nn.Conv2d(wb, 1, kernel_size=1)
        # warm start: one stem channel begins as the plain plane average,
        # whose value on standardized input is the correlation image
        with torch.no_grad():
            self.stem[0].weight[0].fill_(1.0 / m)
            self.stem[0].bias[0].zero_()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1:] != (self.m, self.h, self.w):
            raise ShapeMismatch(
                f"expected (B, {self.m}, {self.h}, {self.w}), got {tuple(x.shape)}")
        x = self.stem(x)
        skips = []
        for conv in self.enc:
            x = conv(x)
            skips.append(x)
            x = F.max_pool2d(x, 2)
        x = self.bottleneck(x)
        for reduce, conv, skip in zip(self.reduce, self.dec, reversed(skips)):
            x = F.interpolate(x, scale_factor=2, mode="bilinear", align_corners=False)
            x = reduce(x)
            x = conv(torch.cat([x, skip], dim=1))
        return self.head(x)


def build_model(h: int, w: int, m: int, width_base: int = 64) -> GFNet:
    """Construct the network for the given canvas and plane count."""
    return GFNet(h, w, m, width_base)


def save_model(model: GFNet, out_dir) -> None:
    """Write weights plus the architecture descriptor into a directory."""
    os.makedirs(out_dir, exist_ok=True)
    torch.save(model.state_dict(), os.path.join(out_dir, "model.pt"))
    desc = {"h": model.h, "w": model.w, "m": model.m,
            "width_base": model.width_base}
    with open(os.path.join(out_dir, "model.json"), "w") as fh:
        json.dump(desc, fh, indent=2)


def load_model(model_dir) -> GFNet:
    """Rebuild a saved network in evaluation mode."""
    with open(os.path.join(model_dir, "model.json")) as fh:
        desc = json.load(fh)
    model = GFNet(desc["h"], desc["w"], desc["m"], desc["width_base"])
    state = torch.load(os.path.join(model_dir, "model.pt"), weights_only=True)
    model.load_state_dict(state)
    model.eval()
    return model
