"""Command-line interface: ``shotsplit {detect,features,eval,synth}``.

Settings are resolved as command-line flags > ``--config`` JSON file >
built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .evaluation import EvalReport, GroundTruth, GroundTruthError, evaluate, format_table
from .frame_repr import frame_feature_matrix
from .ingest import BLOCKS_PER_SIDE, IngestError, load_frames
from .pipeline import Config, ConfigError, NoFramesError, detect_shots
from .segmenter import SegmentationError
from .synth import SynthSpecError, parse_spec, write_corpus
from .texture import FEATURE_NAMES

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NO_FRAMES = 4
EXIT_INVALID = 5
EXIT_SEGMENTATION = 6


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _dump_json(payload, path: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _resolve_config(args) -> Config:
    try:
        base = Config.load(args.config) if args.config else Config()
        return Config.from_mapping(
            {
                "k": args.k,
                "n_g": args.graylevels,
                "min_seg_len": args.min_seg_len,
                "seed": args.seed,
                "tolerance": args.tolerance,
                "orientations": args.orientations,
                "workers": getattr(args, "workers", None),
                "lone_pair": getattr(args, "lone_pair", None),
            },
            base,
        )
    except (ConfigError, ValueError) as exc:
        raise CliError(f"invalid configuration: {exc}", EXIT_INVALID) from exc


def _load(path: str):
    if not path:
        raise CliError("--input is required", EXIT_USAGE)
    try:
        frames = load_frames(path)
    except FileNotFoundError:
        raise CliError(f"cannot read input {path!r}: no such file", EXIT_INPUT) from None
    except (OSError, IngestError) as exc:
        raise CliError(f"cannot read input {path!r}: {exc}", EXIT_INPUT) from exc
    if not frames:
        raise CliError(f"{path}: no frames", EXIT_NO_FRAMES)
    return frames


def cmd_detect(args) -> int:
    config = _resolve_config(args)
    t0 = time.perf_counter()
    frames = _load(args.input)
    decode = time.perf_counter() - t0
    try:
        result = detect_shots(frames, config)
    except NoFramesError as exc:
        raise CliError(f"{args.input}: {exc}", EXIT_NO_FRAMES) from exc
    except SegmentationError as exc:
        raise CliError(f"segmentation failed: {exc}", EXIT_SEGMENTATION) from exc
    _dump_json(result.segmentation.to_json(), args.output)
    if args.rm_dump:
        _dump_json(
            [{"frame": rm.frame_index, "rm": rm.rm.tolist()} for rm in result.representatives],
            args.rm_dump,
        )
    timings = {"decode": decode, **result.timings}
    summary = "  ".join(f"{name} {sec:.2f}s" for name, sec in timings.items())
    print(f"{len(frames)} frames, {len(result.segmentation.segments)} shots | {summary}", file=sys.stderr)
    return EXIT_OK


def cmd_features(args) -> int:
    config = _resolve_config(args)
    frames = _load(args.input)
    header = ["frame", "block_row", "block_col"] + [f"f{i}" for i in range(1, len(FEATURE_NAMES) + 1)]
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        for frame in frames:
            fm = frame_feature_matrix(frame, config.texture).fm
            for b, row in enumerate(fm):
                writer.writerow(
                    [frame.index, b // BLOCKS_PER_SIDE, b % BLOCKS_PER_SIDE] + [format(v, ".9g") for v in row]
                )
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _read_boundaries(path: str) -> GroundTruth:
    try:
        return GroundTruth.load(path)
    except FileNotFoundError:
        raise CliError(f"cannot read {path!r}: no such file", EXIT_INPUT) from None
    except GroundTruthError as exc:
        raise CliError(f"invalid boundary file {path}: {exc}", EXIT_INVALID) from exc


def cmd_eval(args) -> int:
    if not args.input or not args.truth:
        raise CliError("eval needs --input (detected JSON) and --truth (ground-truth JSON)", EXIT_USAGE)
    config = _resolve_config(args)
    detected = _read_boundaries(args.input)
    truth = _read_boundaries(args.truth)
    if detected.total_frames != truth.total_frames:
        raise CliError(
            f"total_frames differ: detected {detected.total_frames}, truth {truth.total_frames}", EXIT_INVALID
        )
    report: EvalReport = evaluate(detected.transitions, truth, config.tolerance)
    print(format_table([(Path(args.input).stem, report)]))
    if args.output:
        _dump_json(report.to_json(), args.output)
    return EXIT_OK


def cmd_synth(args) -> int:
    if not args.input or not args.output:
        raise CliError("synth needs --input (corpus spec JSON) and --output (.y4m)", EXIT_USAGE)
    try:
        with open(args.input, encoding="utf-8") as fh:
            spec = parse_spec(json.load(fh))
    except FileNotFoundError:
        raise CliError(f"cannot read {args.input!r}: no such file", EXIT_INPUT) from None
    except (json.JSONDecodeError, SynthSpecError, ValueError) as exc:
        raise CliError(f"invalid corpus spec: {exc}", EXIT_INVALID) from exc
    truth_path = args.truth or str(Path(args.output).with_suffix(".truth.json"))
    with open(args.output, "wb") as fh:
        truth = write_corpus(spec, fh)
    _dump_json(truth, truth_path)
    print(f"wrote {truth['total_frames']} frames to {args.output}, truth to {truth_path}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="input path (.y4m, image directory or glob; JSON for eval/synth)")
    common.add_argument("--output", help="output path (default: standard output)")
    common.add_argument("--config", help="JSON file with default settings")
    common.add_argument("--k", type=int, help="clusters per frame (default 6)")
    common.add_argument("--graylevels", type=int, help="GLCM gray levels (default 8)")
    common.add_argument("--min-seg-len", dest="min_seg_len", type=int, help="shortest segment (default 2)")
    common.add_argument("--seed", type=int, help="base random seed (default 42)")
    common.add_argument("--tolerance", type=int, help="boundary matching window in frames (default 5)")
    common.add_argument("--orientations", help="comma-separated GLCM angles (default 0,45,90,135)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="shotsplit", description="Texture split-and-merge shot boundary detection.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", parents=[common], help="detect shots, write shots JSON")
    p.add_argument("--workers", type=int, help="processes for per-frame work (default 1)")
    p.add_argument("--lone-pair", dest="lone_pair", choices=("merge", "internal"),
                   help="rule for the last two segments with no outer neighbours (default merge)")
    p.add_argument("--rm-dump", dest="rm_dump", help="also write per-frame representative matrices (JSON)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("features", parents=[common], help="write per-block texture features as CSV")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("eval", parents=[common], help="score detected transitions against ground truth")
    p.add_argument("--truth", help="ground-truth JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic .y4m video and its ground truth")
    p.add_argument("--truth", help="ground-truth output (default: <output>.truth.json)")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"shotsplit {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return 1


if __name__ == "__main__":
    sys.exit(main())
