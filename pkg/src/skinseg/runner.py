"""Frame drivers behind the CLI: behavioral, cycle-accurate and verify runs."""
from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from .camera import (
    PixelSample,
    StreamTiming,
    assemble_pixels,
    decode_cambytes,
    samples_to_images,
)
from .color_space import Rgb444Pixel, ThresholdConfig, classify_skin, rgb_to_yuv
from .errors import DimensionMismatch, ImageIOError, MismatchError
from .frame_buffer import BitFrameBuffer, addr_of
from .frames import BitFrame
from .golden import majority_erode, reference_pipeline
from .imageio import PNM_SUFFIXES, read_pnm, write_pbm
from .window_pipeline import PipelineGeometry, SignalTrace, WindowPipeline

MODES = ("behavioral", "cycle", "verify")
FORMATS = ("pnm", "cambytes")


@dataclass
class RunConfig:
    geometry: PipelineGeometry = field(default_factory=PipelineGeometry)
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)
    mode: str = "behavioral"
    trace_path: str | None = None
    input_path: str | None = None
    output_path: str | None = None
    stats_path: str | None = None
    image_format: str | None = None
    # test hook: (y, x) of a cycle-mode output pixel to flip
    fault: tuple | None = None

    def validate(self) -> "RunConfig":
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        self.geometry.validate()
        if self.trace_path is not None:
            clash = {self.input_path, self.output_path, self.stats_path} - {None}
            if os.path.abspath(self.trace_path) in {os.path.abspath(p) for p in clash}:
                raise ValueError("trace path collides with another input/output path")
        return self


@dataclass
class RunStats:
    frames: int = 0
    cycles: int | None = None
    valid_outputs: int = 0
    first_valid_cycle: int | None = None
    max_fifo_occupancy: int | None = None
    wall_time: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)


CONFIG_KEYS = ("width", "height", "window", "majority", "t_lo", "t_hi", "mode", "trace")
_INT_KEYS = {"width", "height", "window", "majority", "t_lo", "t_hi"}


def read_config_file(path) -> dict:
    """Parse flat ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: expected one of {', '.join(CONFIG_KEYS)} as key=value")
            values[key] = int(value) if key in _INT_KEYS else value
    return values


def write_config_file(path, values: dict):
    with open(path, "w", encoding="utf-8") as fh:
        for key in CONFIG_KEYS:
            if values.get(key) is not None:
                fh.write(f"{key}={values[key]}\n")


def build_config(file_values: dict, overrides: dict) -> RunConfig:
    """Defaults, then config-file values, then explicit overrides (None = unset)."""
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    g = PipelineGeometry()
    geom = PipelineGeometry(
        w=merged.get("width", g.w),
        h=merged.get("height", g.h),
        n=merged.get("window", g.n),
        m=merged.get("majority", g.m),
    )
    t = ThresholdConfig()
    cfg = RunConfig(
        geometry=geom,
        thresholds=ThresholdConfig(merged.get("t_lo", t.t_lo), merged.get("t_hi", t.t_hi)),
        mode=merged.get("mode", "behavioral"),
        trace_path=merged.get("trace"),
        input_path=merged.get("input"),
        output_path=merged.get("output"),
        stats_path=merged.get("stats"),
        image_format=merged.get("format"),
    )
    return cfg.validate()


# -- input ------------------------------------------------------------------

@dataclass
class FrameInput:
    """One frame of work: either a colour raster, a pre-thresholded mask, or
    pixel samples assembled from a camera stream."""

    name: str
    rgb: np.ndarray | None = None
    mask: BitFrame | None = None
    samples: list | None = None


def detect_format(path) -> str:
    if os.path.isdir(path):
        return "pnm"
    return "cambytes" if str(path).endswith(".cambytes") else "pnm"


def _check_dims(name, w, h, geom):
    if (w, h) != (geom.w, geom.h):
        raise DimensionMismatch(f"{name}: image is {w}x{h}, configured for {geom.w}x{geom.h}")


def load_inputs(cfg: RunConfig) -> list[FrameInput]:
    path = cfg.input_path
    if path is None:
        raise ImageIOError("no input path given")
    if not os.path.exists(path):
        raise ImageIOError(f"{path}: no such file or directory")
    fmt = cfg.image_format or detect_format(path)
    geom = cfg.geometry
    if fmt == "cambytes":
        with open(path, "rb") as fh:
            data = fh.read()
        if not data:
            raise ImageIOError(f"{path}: empty file")
        timing = StreamTiming(geom.w, geom.h)
        samples = assemble_pixels(decode_cambytes(data), timing)
        stem = os.path.splitext(os.path.basename(path))[0]
        by_frame: dict[int, list[PixelSample]] = {}
        for s in samples:
            by_frame.setdefault(s.frame, []).append(s)
        if not by_frame:
            raise ImageIOError(f"{path}: stream holds no active video")
        return [FrameInput(f"{stem}_{k:05d}", samples=v) for k, v in sorted(by_frame.items())]
    if fmt != "pnm":
        raise ValueError(f"unknown image format {fmt!r}")
    if os.path.isdir(path):
        names = sorted(f for f in os.listdir(path) if f.lower().endswith(PNM_SUFFIXES))
        if not names:
            raise ImageIOError(f"{path}: directory holds no PNM images")
        files = [os.path.join(path, f) for f in names]
    else:
        files = [path]
    frames = []
    for f in files:
        kind, payload = read_pnm(f)
        stem = os.path.splitext(os.path.basename(f))[0]
        if kind == "rgb":
            _check_dims(f, payload.shape[1], payload.shape[0], geom)
            frames.append(FrameInput(stem, rgb=payload))
        else:
            _check_dims(f, payload.w, payload.h, geom)
            frames.append(FrameInput(stem, mask=payload))
    return frames


# -- behavioral ---------------------------------------------------------------

def behavioral_frame(item: FrameInput, cfg: RunConfig) -> BitFrame:
    geom = cfg.geometry
    if item.mask is not None:
        return majority_erode(item.mask, geom.n, geom.m)
    rgb = item.rgb
    if rgb is None:
        rgb = samples_to_images(item.samples, StreamTiming(geom.w, geom.h))[0]
    return reference_pipeline(rgb, cfg.thresholds, geom)


# -- cycle-accurate -------------------------------------------------------------

def _pixel_stream(item: FrameInput, w: int) -> Iterator[tuple[int, int, Rgb444Pixel | int]]:
    if item.samples is not None:
        for s in item.samples:
            yield s.x, s.y, s.pixel
    elif item.rgb is not None:
        for y, line in enumerate(item.rgb.tolist()):
            for x, (r, g, b) in enumerate(line):
                yield x, y, Rgb444Pixel(r, g, b)
    else:
        for i, bit in enumerate(item.mask.flat().tolist()):
            yield i % w, i // w, bit


class CycleHarness:
    """Thresholder -> frame buffer (write port); frame buffer (read port) ->
    window pipeline, all advanced by one shared clock."""

    def __init__(self, cfg: RunConfig, trace_fh=None):
        geom = cfg.geometry
        self.cfg = cfg
        self.fb = BitFrameBuffer()
        trace = SignalTrace(trace_fh, geom.n - 1) if trace_fh is not None else None
        self.pipeline = WindowPipeline(geom, trace)
        self.cycles = 0
        self.valid_outputs = 0
        self.first_valid_cycle = None
        self.max_fifo_occupancy = 0

    def run(self, item: FrameInput) -> BitFrame:
        geom = self.cfg.geometry
        w, h = geom.w, geom.h
        fb = self.fb
        thresholds = self.cfg.thresholds

        # write phase: one thresholded pixel per clock into port A
        for x, y, px in _pixel_stream(item, w):
            bit = px if isinstance(px, int) else classify_skin(rgb_to_yuv(px).u, thresholds)
            fb.write(addr_of(x, y, w, h), bit, 1)
            fb.step()
            self.cycles += 1

        # read phase: port B streams the frame in raster order; data arrives
        # one clock after its request, so the pipeline idles on the first clock
        pipe = self.pipeline
        pipe.reset()
        out = BitFrame.zeros(w, h)
        dst = out.bits
        total = w * h
        data_valid = 0
        for addr in range(total + 1):
            sample = pipe.step(fb.read_data(), data_valid)
            if sample is not None:
                dst[sample[1]] = sample[0]
                self.valid_outputs += 1
            if addr < total:
                fb.read_request(addr)
                data_valid = 1
            else:
                data_valid = 0
            fb.step()
            self.cycles += 1
        if self.first_valid_cycle is None:
            self.first_valid_cycle = pipe.first_valid_index
        self.max_fifo_occupancy = max(self.max_fifo_occupancy, pipe.max_occupancy)
        return out


# -- drivers --------------------------------------------------------------------

def _run_behavioral(frames, cfg):
    geom = cfg.geometry
    masks = [behavioral_frame(f, cfg) for f in frames]
    interior = (geom.w - geom.n + 1) * (geom.h - geom.n + 1)
    return masks, RunStats(frames=len(masks), valid_outputs=interior * len(masks))


def _run_cycle(frames, cfg):
    trace_fh = open(cfg.trace_path, "w", encoding="utf-8", newline="") if cfg.trace_path else None
    try:
        harness = CycleHarness(cfg, trace_fh)
        masks = [harness.run(f) for f in frames]
    finally:
        if trace_fh is not None:
            trace_fh.close()
    if cfg.fault is not None and masks:
        y, x = cfg.fault
        masks[0].bits[y, x] ^= 1
    stats = RunStats(
        frames=len(masks),
        cycles=harness.cycles,
        valid_outputs=harness.valid_outputs,
        first_valid_cycle=harness.first_valid_cycle,
        max_fifo_occupancy=harness.max_fifo_occupancy,
    )
    return masks, stats


def compare_masks(expected: BitFrame, actual: BitFrame, name: str = "frame"):
    """Raise MismatchError describing the first differing pixel, if any."""
    diff = np.argwhere(expected.bits != actual.bits)
    if diff.size == 0:
        return
    y, x = (int(v) for v in diff[0])
    raise MismatchError(
        f"{name}: {len(diff)} pixel(s) differ; first at x={x} y={y} "
        f"(behavioral={expected[y, x]}, cycle={actual[y, x]}); "
        f"ones behavioral={expected.count()} cycle={actual.count()}",
        first=(x, y),
        count=len(diff),
    )


def run(cfg: RunConfig):
    """Process every input frame per ``cfg.mode``; returns (names, masks, stats)."""
    cfg.validate()
    start = time.perf_counter()
    frames = load_inputs(cfg)
    if cfg.mode == "behavioral":
        masks, stats = _run_behavioral(frames, cfg)
    elif cfg.mode == "cycle":
        masks, stats = _run_cycle(frames, cfg)
    else:
        expected, _ = _run_behavioral(frames, cfg)
        masks, stats = _run_cycle(frames, cfg)
        for f, a, b in zip(frames, expected, masks):
            compare_masks(a, b, f.name)
    stats.wall_time = time.perf_counter() - start
    return [f.name for f in frames], masks, stats


def write_masks(output_path, names, masks):
    if len(masks) == 1 and not os.path.isdir(output_path):
        write_pbm(output_path, masks[0])
        return [output_path]
    os.makedirs(output_path, exist_ok=True)
    paths = []
    for name, mask in zip(names, masks):
        p = os.path.join(output_path, f"{name}.pbm")
        write_pbm(p, mask)
        paths.append(p)
    return paths

