"""PNM ingestion and PBM mask output.

Colour inputs are 8-bit PPM reduced to 4 bits per channel by keeping the high
nibble.  PGM/PBM inputs are taken as already-thresholded masks (any non-zero
PGM sample, or a set PBM bit, is skin).  Masks are written as raw P4 with
bit value 1 meaning skin.
"""
from __future__ import annotations

import re

import numpy as np

from .errors import ImageIOError
from .frames import BitFrame

PNM_SUFFIXES = (".ppm", ".pgm", ".pbm", ".pnm")

_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*([^\s#]+)")


def _parse_header(data: bytes, count: int):
    """Read ``count`` whitespace/comment separated tokens; return them and
    the offset of the raster (one whitespace byte after the last token)."""
    pos = 0
    tokens = []
    for _ in range(count):
        match = _TOKEN.match(data, pos)
        if match is None:
            raise ValueError("truncated header")
        tokens.append(match.group(1))
        pos = match.end()
    if pos >= len(data) or data[pos:pos + 1] not in b" \t\r\n":
        raise ValueError("missing raster")
    return tokens, pos + 1


def read_pnm(path):
    """Return ``("rgb", (h, w, 3) uint8 in 0..15)`` or ``("mask", BitFrame)``."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ImageIOError(f"{path}: {exc}") from exc
    if not data:
        raise ImageIOError(f"{path}: empty file")
    magic = data[:2]
    try:
        if magic == b"P4":
            (w, h), offset = _dims(data, 2)
            row_bytes = (w + 7) // 8
            raw = _raster(data, offset, row_bytes * h).reshape(h, row_bytes)
            return "mask", BitFrame(np.unpackbits(raw, axis=1)[:, :w])
        if magic in (b"P5", b"P6"):
            (w, h, maxval), offset = _dims(data, 3)
            if maxval != 255:
                raise ValueError(f"maxval {maxval}; only 8-bit samples are supported")
            depth = 3 if magic == b"P6" else 1
            raw = _raster(data, offset, w * h * depth)
            if depth == 1:
                return "mask", BitFrame(raw.reshape(h, w))
            return "rgb", (raw.reshape(h, w, 3) >> 4).astype(np.uint8)
    except ValueError as exc:
        raise ImageIOError(f"{path}: {exc}") from exc
    raise ImageIOError(f"{path}: not a binary PNM file (need P4, P5 or P6)")


def _dims(data, count):
    tokens, offset = _parse_header(data[2:], count)
    values = [int(t) for t in tokens]
    if values[0] <= 0 or values[1] <= 0:
        raise ValueError(f"bad size {values[0]}x{values[1]}")
    return values, offset + 2


def _raster(data, offset, size):
    raw = np.frombuffer(data, dtype=np.uint8, count=-1, offset=offset)
    if raw.size < size:
        raise ValueError(f"raster truncated: {raw.size} of {size} bytes")
    return raw[:size]


def write_pbm(path, frame: BitFrame):
    header = f"P4\n{frame.w} {frame.h}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.packbits(frame.bits, axis=1).tobytes())


def read_pbm_bits(path) -> BitFrame:
    kind, payload = read_pnm(path)
    if kind != "mask":
        raise ImageIOError(f"{path}: not a binary image")
    return payload


def write_ppm(path, rgb8):
    """Write an 8-bit ``(h, w, 3)`` array as binary P6."""
    arr = np.asarray(rgb8, dtype=np.uint8)
    h, w = arr.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())
