"""Whole-frame reference model: threshold every pixel, then count every
window directly.  No line buffers, no running sums; this is the ground truth
the streaming model is checked against.
"""
from __future__ import annotations

import numpy as np

from .color_space import DEFAULT_THRESHOLDS, ThresholdConfig, threshold_frame
from .errors import BadGeometry, DimensionMismatch
from .frames import BitFrame
from .window_pipeline import PipelineGeometry


def majority_erode(frame: BitFrame, n: int = 7, m: int = 37) -> BitFrame:
    """1 where the n x n window centred on the pixel lies inside the frame
    and holds more than ``m`` ones; 0 elsewhere, including the border."""
    h, w = frame.h, frame.w
    if n % 2 == 0 or n < 1 or n > min(w, h):
        raise BadGeometry(f"window size {n} invalid for a {w}x{h} frame")
    if not 0 <= m < n * n:
        raise BadGeometry(f"majority threshold {m} outside [0, {n * n})")
    bits = frame.bits
    ih, iw = h - n + 1, w - n + 1
    # one slice per window offset: counts[i, j] is the popcount of the window
    # whose top-left corner is (i, j)
    counts = np.zeros((ih, iw), dtype=np.uint16)
    for dy in range(n):
        for dx in range(n):
            counts += bits[dy:dy + ih, dx:dx + iw]
    out = np.zeros((h, w), dtype=np.uint8)
    r = (n - 1) // 2
    out[r:r + ih, r:r + iw] = counts > m
    return BitFrame(out)


def reference_pipeline(image, cfg: ThresholdConfig = DEFAULT_THRESHOLDS,
                       geom: PipelineGeometry = PipelineGeometry()) -> BitFrame:
    rgb = np.asarray(image)
    if rgb.shape[:2] != (geom.h, geom.w):
        raise DimensionMismatch(
            f"image is {rgb.shape[1]}x{rgb.shape[0]}, geometry expects {geom.w}x{geom.h}"
        )
    geom.validate()
    return majority_erode(threshold_frame(rgb, cfg), geom.n, geom.m)
