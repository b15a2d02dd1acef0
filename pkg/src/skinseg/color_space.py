"""RGB444 <-> YUV via the integer reversible component transform, plus the
U-channel skin classifier.

    Y = floor((R + 2G + B) / 4)      U = R - G      V = B - G
    G = Y - floor((U + V) / 4)       R = U + G      B = V + G

Python's ``//`` already floors toward negative infinity, which is what makes
the inverse exact for negative chroma.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ReconstructionError


class Rgb444Pixel(NamedTuple):
    r: int
    g: int
    b: int

    def pack(self) -> int:
        return (self.r << 8) | (self.g << 4) | self.b

    @classmethod
    def unpack(cls, word: int) -> "Rgb444Pixel":
        return cls((word >> 8) & 0xF, (word >> 4) & 0xF, word & 0xF)


class YuvPixel(NamedTuple):
    y: int
    u: int
    v: int


@dataclass(frozen=True)
class ThresholdConfig:
    """Skin band on the U channel, expressed at 8-bit scale."""

    t_lo: int = 10
    t_hi: int = 74

    def __post_init__(self):
        if not 0 <= self.t_lo < self.t_hi <= 255:
            raise ValueError(
                f"need 0 <= t_lo < t_hi <= 255, got t_lo={self.t_lo} t_hi={self.t_hi}"
            )


DEFAULT_THRESHOLDS = ThresholdConfig()


def rgb_to_yuv(p: Rgb444Pixel) -> YuvPixel:
    r, g, b = p
    return YuvPixel((r + 2 * g + b) // 4, r - g, b - g)


def yuv_to_rgb(q: YuvPixel) -> Rgb444Pixel:
    y, u, v = q
    g = y - (u + v) // 4
    r = u + g
    b = v + g
    if not (0 <= r <= 15 and 0 <= g <= 15 and 0 <= b <= 15):
        raise ReconstructionError(f"{tuple(q)} is not the transform of any RGB444 pixel")
    return Rgb444Pixel(r, g, b)


def classify_skin(u: int, cfg: ThresholdConfig = DEFAULT_THRESHOLDS) -> int:
    # 4-bit chroma is lifted to 8-bit scale (x16) so the configured bounds stay
    # in the units they are usually quoted in.
    scaled = 16 * u
    return 1 if cfg.t_lo < scaled < cfg.t_hi else 0


def threshold_frame(frame, cfg: ThresholdConfig = DEFAULT_THRESHOLDS):
    """Per-pixel skin mask for an ``(h, w, 3)`` raster of 4-bit channels.

    Vectorized; :func:`classify_skin` is the scalar form used by the streaming
    path.
    """
    from .frames import BitFrame

    rgb = np.asarray(frame)
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.shape[0] == 0 or rgb.shape[1] == 0:
        raise ValueError(f"expected a non-empty (h, w, 3) raster, got shape {rgb.shape}")
    scaled = 16 * (rgb[..., 0].astype(np.int16) - rgb[..., 1].astype(np.int16))
    mask = (scaled > cfg.t_lo) & (scaled < cfg.t_hi)
    return BitFrame(mask.astype(np.uint8))
