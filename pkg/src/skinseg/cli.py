"""Command line front end.

    skinseg segment --input in.ppm --output mask.pbm [--mode behavioral|cycle|verify]
    skinseg verify  --input in.ppm [--output mask.pbm] [--trace trace.csv]
    skinseg camsim  --input in.ppm --output in.cambytes

Exit codes: 0 ok, 2 usage, 3 I/O or malformed input, 4 geometry, 5 mismatch.
"""
from __future__ import annotations

import argparse
import os
import sys

from .camera import StreamTiming, emit_frames, encode_cambytes, rgb444_camera
from .errors import (
    BadGeometry,
    DimensionMismatch,
    FrameGeometryError,
    ImageIOError,
    MismatchError,
    OutOfRange,
    PhaseError,
    UnsupportedFormat,
)
from .imageio import PNM_SUFFIXES, read_pnm
from .runner import FORMATS, MODES, build_config, read_config_file, run, write_masks

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_GEOMETRY = 4
EXIT_MISMATCH = 5


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--input", help="PPM/PGM/PBM file, directory of them, or .cambytes stream")
    p.add_argument("--output", help="mask path (P4); a directory when there are several frames")
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--window", type=int, help="odd window size n")
    p.add_argument("--majority", type=int, help="output is 1 when the window holds more than this many ones")
    p.add_argument("--t-lo", type=int, dest="t_lo")
    p.add_argument("--t-hi", type=int, dest="t_hi")
    p.add_argument("--format", choices=FORMATS, help="input format (default: from extension)")
    p.add_argument("--stats", help="write stats JSON here instead of stdout")
    p.add_argument("--trace", help="per-cycle signal trace CSV (cycle and verify modes)")
    p.add_argument("--inject-fault", dest="inject_fault", help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skinseg", description="Streaming skin segmentation model")
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="threshold + majority-erode frames into P4 masks")
    _add_common(seg)
    seg.add_argument("--mode", choices=MODES)

    ver = sub.add_parser("verify", help="run both models and compare masks bit for bit")
    _add_common(ver)

    cam = sub.add_parser("camsim", help="encode images as a camera byte stream")
    _add_common(cam)
    cam.add_argument("--h-blank", type=int, default=16, dest="h_blank")
    cam.add_argument("--v-blank", type=int, default=2, dest="v_blank")
    return parser


def _config_from_args(args, mode=None):
    file_values = read_config_file(args.config) if args.config else {}
    overrides = {
        "width": args.width,
        "height": args.height,
        "window": args.window,
        "majority": args.majority,
        "t_lo": args.t_lo,
        "t_hi": args.t_hi,
        "mode": mode or getattr(args, "mode", None),
        "trace": args.trace,
        "input": args.input,
        "output": args.output,
        "stats": args.stats,
        "format": args.format,
    }
    cfg = build_config(file_values, overrides)
    if args.inject_fault:
        x, y = (int(v) for v in args.inject_fault.split(","))
        cfg.fault = (y, x)
    return cfg


def _emit_stats(cfg, stats, out):
    line = stats.to_json()
    if cfg.stats_path:
        with open(cfg.stats_path, "w", encoding="utf-8") as fh:
            fh.write(line + "\n")
    else:
        print(line, file=out)


def cmd_segment(args, out=sys.stdout) -> int:
    cfg = _config_from_args(args)
    if cfg.output_path is None and cfg.mode != "verify":
        raise ValueError("--output is required")
    names, masks, stats = run(cfg)
    if cfg.output_path is not None:
        write_masks(cfg.output_path, names, masks)
    _emit_stats(cfg, stats, out)
    return EXIT_OK


def cmd_verify(args, out=sys.stdout) -> int:
    cfg = _config_from_args(args, mode="verify")
    names, masks, stats = run(cfg)
    if cfg.output_path is not None:
        write_masks(cfg.output_path, names, masks)
    _emit_stats(cfg, stats, out)
    return EXIT_OK


def cmd_camsim(args, out=sys.stdout) -> int:
    cfg = _config_from_args(args)
    if cfg.input_path is None or cfg.output_path is None:
        raise ValueError("camsim needs --input and --output")
    path = cfg.input_path
    if os.path.isdir(path):
        files = sorted(os.path.join(path, f) for f in os.listdir(path) if f.lower().endswith(PNM_SUFFIXES))
    elif os.path.exists(path):
        files = [path]
    else:
        raise ImageIOError(f"{path}: no such file or directory")
    images = []
    for f in files:
        kind, payload = read_pnm(f)
        if kind != "rgb":
            raise UnsupportedFormat(f"{f}: camsim needs a colour (P6) image")
        images.append(payload)
    if not images:
        raise ImageIOError(f"{path}: no images found")
    h, w = images[0].shape[:2]
    if any(img.shape != images[0].shape for img in images):
        raise DimensionMismatch("all frames in a sequence must share one size")
    timing = StreamTiming(w, h, args.h_blank, args.v_blank)
    stream = emit_frames(images, timing, rgb444_camera())
    with open(cfg.output_path, "wb") as fh:
        fh.write(encode_cambytes(stream))
    return EXIT_OK


COMMANDS = {"segment": cmd_segment, "verify": cmd_verify, "camsim": cmd_camsim}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except MismatchError as exc:
        print(f"verify: MISMATCH: {exc}", file=err)
        return EXIT_MISMATCH
    except (BadGeometry, DimensionMismatch, FrameGeometryError, OutOfRange) as exc:
        print(f"{args.command}: geometry error: {exc}", file=err)
        return EXIT_GEOMETRY
    except (ImageIOError, PhaseError, UnsupportedFormat, OSError) as exc:
        print(f"{args.command}: I/O error: {exc}", file=err)
        return EXIT_IO
    except ValueError as exc:
        print(f"{args.command}: usage error: {exc}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
