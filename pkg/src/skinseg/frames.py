"""Binary raster shared by the frame buffer, both filter paths and the CLI."""
from __future__ import annotations

import numpy as np


class BitFrame:
    """A ``w`` x ``h`` mask stored row-major as a ``(h, w)`` uint8 array of 0/1."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        arr = np.asarray(bits)
        if arr.ndim != 2:
            raise ValueError(f"BitFrame needs a 2-D array, got shape {arr.shape}")
        self.bits = (arr != 0).astype(np.uint8)

    @classmethod
    def zeros(cls, w: int, h: int) -> "BitFrame":
        return cls(np.zeros((h, w), dtype=np.uint8))

    @classmethod
    def from_flat(cls, bits, w: int, h: int) -> "BitFrame":
        flat = np.asarray(bits, dtype=np.uint8)
        if flat.size != w * h:
            raise ValueError(f"expected {w * h} bits, got {flat.size}")
        return cls(flat.reshape(h, w))

    @property
    def w(self) -> int:
        return self.bits.shape[1]

    @property
    def h(self) -> int:
        return self.bits.shape[0]

    def flat(self):
        return self.bits.reshape(-1)

    def count(self) -> int:
        return int(self.bits.sum())

    def __getitem__(self, yx):
        return int(self.bits[yx])

    def __eq__(self, other):
        if not isinstance(other, BitFrame):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(np.array_equal(self.bits, other.bits))

    __hash__ = None

    def __repr__(self):
        return f"BitFrame(w={self.w}, h={self.h}, ones={self.count()})"
