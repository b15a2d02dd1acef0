"""Behavioral OV7670 output side and the matching capture logic.

The sensor is configured for RGB444 and sends each pixel as two bytes on
D[7:0] while HREF is high: ``0000RRRR`` then ``GGGGBBBB``.  Each active line
is followed by ``h_blank`` idle pixel clocks, and each frame by ``v_blank``
line-times with VSYNC high.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple

import numpy as np

from .color_space import Rgb444Pixel
from .errors import FrameGeometryError, PhaseError, UnsupportedFormat

FORMAT_REG = 0x12
RGB444_CODE = 0x04


class PixelFormat(Enum):
    RGB444 = "RGB444"
    UNSUPPORTED = "UNSUPPORTED"


@dataclass(frozen=True)
class CameraRegisterFile:
    registers: dict = field(default_factory=dict)

    @property
    def format(self) -> PixelFormat:
        if self.registers.get(FORMAT_REG) == RGB444_CODE:
            return PixelFormat.RGB444
        return PixelFormat.UNSUPPORTED


def write_register(regs: CameraRegisterFile, addr: int, value: int) -> CameraRegisterFile:
    """SCCB-style register write; returns the updated register file."""
    updated = dict(regs.registers)
    updated[addr & 0xFF] = value & 0xFF
    return CameraRegisterFile(updated)


def rgb444_camera() -> CameraRegisterFile:
    return write_register(CameraRegisterFile(), FORMAT_REG, RGB444_CODE)


class SyncedByte(NamedTuple):
    d: int
    vsync: int
    href: int
    t: int


class PixelSample(NamedTuple):
    pixel: Rgb444Pixel
    x: int
    y: int
    frame: int


@dataclass(frozen=True)
class StreamTiming:
    w: int
    h: int
    h_blank: int = 16
    v_blank: int = 2
    pclk_hz: int = 25_000_000

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0 or self.h_blank < 0 or self.v_blank < 1:
            raise ValueError(f"invalid stream timing {self}")

    @property
    def line_cycles(self) -> int:
        return 2 * self.w + self.h_blank

    @property
    def frame_cycles(self) -> int:
        return self.line_cycles * (self.h + self.v_blank)


def emit_frame(image, timing: StreamTiming, regs: CameraRegisterFile, t0: int = 0) -> list[SyncedByte]:
    if regs.format is not PixelFormat.RGB444:
        raise UnsupportedFormat(f"camera is configured for {regs.format.value}, expected RGB444")
    rgb = np.asarray(image)
    if rgb.shape != (timing.h, timing.w, 3):
        raise FrameGeometryError(
            f"image shape {rgb.shape} does not match timing {timing.w}x{timing.h}"
        )
    out = []
    t = t0
    for line in rgb.tolist():
        for r, g, b in line:
            out.append(SyncedByte(r & 0xF, 0, 1, t))
            out.append(SyncedByte(((g & 0xF) << 4) | (b & 0xF), 0, 1, t + 1))
            t += 2
        for _ in range(timing.h_blank):
            out.append(SyncedByte(0, 0, 0, t))
            t += 1
    for _ in range(timing.v_blank * timing.line_cycles):
        out.append(SyncedByte(0, 1, 0, t))
        t += 1
    return out


def emit_frames(images: Iterable, timing: StreamTiming, regs: CameraRegisterFile) -> list[SyncedByte]:
    out: list[SyncedByte] = []
    for image in images:
        out.extend(emit_frame(image, timing, regs, t0=len(out)))
    return out


def assemble_pixels(stream: Iterable[SyncedByte], timing: StreamTiming) -> list[PixelSample]:
    """Pair up HREF-high bytes into pixels and place them using HREF/VSYNC edges."""
    samples: list[PixelSample] = []
    frame = 0
    y = 0
    run: list[int] = []
    run_start = None

    def close_run():
        # with h_blank = 0 consecutive lines share one HREF run
        nonlocal y
        if len(run) % 2:
            raise PhaseError(
                f"frame {frame} line {y}: odd HREF run of {len(run)} bytes starting at t={run_start}"
            )
        line_bytes = 2 * timing.w
        if len(run) % line_bytes:
            raise FrameGeometryError(
                f"frame {frame} line {y}: {len(run) // 2} pixels, expected {timing.w}"
            )
        for start in range(0, len(run), line_bytes):
            if y >= timing.h:
                raise FrameGeometryError(f"frame {frame} has more than {timing.h} lines")
            for x in range(timing.w):
                hi, lo = run[start + 2 * x], run[start + 2 * x + 1]
                samples.append(PixelSample(Rgb444Pixel(hi & 0xF, lo >> 4, lo & 0xF), x, y, frame))
            y += 1
        run.clear()

    def close_frame():
        nonlocal frame, y
        if y != timing.h:
            raise FrameGeometryError(f"frame {frame} ended after {y} lines, expected {timing.h}")
        frame += 1
        y = 0

    for sb in stream:
        if sb.href and not sb.vsync:
            if not run:
                run_start = sb.t
            run.append(sb.d)
            continue
        if run:
            close_run()
        if sb.vsync and y:
            close_frame()
    if run:
        close_run()
    if y:
        close_frame()
    return samples


def samples_to_images(samples: Iterable[PixelSample], timing: StreamTiming) -> list:
    """Collect assembled samples back into ``(h, w, 3)`` uint8 rasters."""
    frames: dict[int, np.ndarray] = {}
    for s in samples:
        img = frames.get(s.frame)
        if img is None:
            img = frames[s.frame] = np.zeros((timing.h, timing.w, 3), dtype=np.uint8)
        img[s.y, s.x] = s.pixel
    return [frames[k] for k in sorted(frames)]


def encode_cambytes(stream: Iterable[SyncedByte]) -> bytes:
    """Serialize to 16-bit little-endian records: d | href << 8 | vsync << 9."""
    words = np.fromiter(
        ((sb.d & 0xFF) | (sb.href & 1) << 8 | (sb.vsync & 1) << 9 for sb in stream),
        dtype="<u2",
    )
    return words.tobytes()


def decode_cambytes(data: bytes) -> list[SyncedByte]:
    if len(data) % 2:
        raise PhaseError(f"truncated record stream: {len(data)} bytes is not a whole number of records")
    words = np.frombuffer(data, dtype="<u2")
    if words.size and int(words.max()) >> 10:
        bad = int(np.flatnonzero(words >> 10)[0])
        raise PhaseError(f"record {bad} has reserved bits set")
    return [
        SyncedByte(w & 0xFF, (w >> 9) & 1, (w >> 8) & 1, t)
        for t, w in enumerate(words.tolist())
    ]
