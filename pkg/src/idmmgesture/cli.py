"""Command line interface.

Subcommands: ``gen``, ``segment``, ``encode``, ``train``, ``predict``,
``run`` and ``evaluate``.  Options may also come from a flat ``key=value``
file passed with ``--config`` (keys are flag names, with ``-`` or ``_``);
flags given on the command line win.

Exit codes: 0 success, 1 a sequence or stage failed, 2 bad usage.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .classify import load_model, save_model
from .depthio import load_sequence, save_dseq
from .evaluation import (
    dumps_annotations,
    mean_jaccard,
    parse_annotations,
    parse_lengths,
    write_annotations,
    write_lengths,
)
from .pipeline import (
    PipelineConfig,
    discover_inputs,
    encode_sequence,
    predict_manifest,
    run_pipeline,
    sequence_id,
    train_from_manifest,
    write_manifest,
)
from .qomseg import SegmentationParams, mean_gesture_length, segment
from .synth import SynthConfig, generate_corpus

log = logging.getLogger("idmmgesture")

DEFAULTS = {
    "pixel_threshold": 60,
    "boundary_fraction": 0.125,
    "window_divisor": 2.0,
    "side": 32,
    "jobs": 1,
    "seed": 0,
    "count": 1,
    "gestures": 5,
    "labels": "1,2,3,4,5,6,7,8,9,10",
    "width": 64,
    "height": 64,
    "noise": 0.0,
    "gap": 6,
    "min_length": 32,
    "max_length": 48,
    "amplitude": 200,
    "prefix": "seq",
}


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _seg_options(p):
    p.add_argument("--pixel-threshold", type=int, help="depth difference counted as movement (default 60)")
    p.add_argument("--boundary-fraction", type=float, help="fraction of L pooled at each end for the threshold (default 0.125)")
    p.add_argument("--window-divisor", type=float, help="refinement window is L / divisor (default 2)")
    p.add_argument("--mean-length", type=int, help="mean gesture length L in frames")
    p.add_argument("--train-annotations", help="annotation file to derive L from")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idmmgesture", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    parser.add_argument("--config", help="key=value file of option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--output", help="output directory")
    p.add_argument("--count", type=int, help="number of sequences")
    p.add_argument("--seed", type=int)
    p.add_argument("--gestures", type=int, help="gestures per sequence")
    p.add_argument("--labels", help="comma-separated gesture ids")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--noise", type=float, help="Gaussian depth noise sigma")
    p.add_argument("--gap", type=int, help="neutral frames between gestures")
    p.add_argument("--min-length", type=int)
    p.add_argument("--max-length", type=int)
    p.add_argument("--amplitude", type=int)
    p.add_argument("--prefix", help="sequence id prefix")

    p = sub.add_parser("segment", help="print QOM segments (1-based) per sequence")
    p.add_argument("--input")
    p.add_argument("--output", help="file to write (default stdout)")
    _seg_options(p)

    p = sub.add_parser("encode", help="write one pseudo-color PNG per segment plus manifest.tsv")
    p.add_argument("--input")
    p.add_argument("--output", help="output directory")
    p.add_argument("--gt", help="encode these labelled intervals instead of segmenting")
    _seg_options(p)

    p = sub.add_parser("train", help="build a template model from a labelled manifest")
    p.add_argument("--input", help="manifest.tsv written by encode --gt")
    p.add_argument("--model", help="model file to write")
    p.add_argument("--side", type=int, help="thumbnail side (default 32)")

    p = sub.add_parser("predict", help="classify the segments of an encode manifest")
    p.add_argument("--input", help="manifest.tsv written by encode")
    p.add_argument("--model")
    p.add_argument("--output", help="prediction file (default stdout)")

    p = sub.add_parser("run", help="full pipeline: segment, encode, classify")
    p.add_argument("--input")
    p.add_argument("--model")
    p.add_argument("--output", help="prediction file (default stdout)")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    _seg_options(p)

    p = sub.add_parser("evaluate", help="mean Jaccard of predictions against ground truth")
    p.add_argument("--gt")
    p.add_argument("--pred")
    p.add_argument("--lengths")
    return parser


def _resolve(args, config):
    """Fill unset options from the config file, then built-in defaults."""
    for key, value in vars(args).items():
        if value is not None or key in ("command", "config", "verbose"):
            continue
        if key in config:
            setattr(args, key, config[key])
        elif key in DEFAULTS:
            setattr(args, key, DEFAULTS[key])
    return args


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) in (None, ""):
            raise UsageError(f"--{name.replace('_', '-')} is required for '{args.command}'")


def _seg_params(args) -> SegmentationParams:
    if args.mean_length is not None:
        length = int(args.mean_length)
    elif args.train_annotations:
        length = mean_gesture_length(parse_annotations(args.train_annotations))
    else:
        raise UsageError("give --mean-length or --train-annotations")
    try:
        return SegmentationParams(
            mean_gesture_length=length,
            pixel_threshold=int(args.pixel_threshold),
            boundary_fraction=float(args.boundary_fraction),
            window_divisor=float(args.window_divisor),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text, output):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_gen(args):
    _require(args, "output")
    cfg = SynthConfig(
        width=int(args.width),
        height=int(args.height),
        gesture_count=int(args.gestures),
        labels=tuple(int(s) for s in str(args.labels).split(",") if s.strip()),
        gesture_length_range=(int(args.min_length), int(args.max_length)),
        neutral_gap=int(args.gap),
        amplitude=int(args.amplitude),
        noise_sigma=float(args.noise),
        seed=int(args.seed),
    )
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    truth, lengths = {}, {}
    for sid, res in generate_corpus(cfg, int(args.count), args.prefix):
        save_dseq(res.sequence, out / f"{sid}.dseq")
        truth[sid] = res.ground_truth
        lengths[sid] = len(res.sequence)
    write_annotations(truth, out / "groundtruth.txt")
    write_lengths(lengths, out / "lengths.txt")
    log.info("wrote %d sequences to %s", len(truth), out)
    return 0


def cmd_segment(args):
    _require(args, "input")
    params = _seg_params(args)
    paths = discover_inputs(args.input)
    if not paths:
        raise FileNotFoundError(f"no sequences found under {args.input}")
    lines, status = [], 0
    for path in paths:
        sid = sequence_id(path)
        try:
            result = segment(load_sequence(path), params)
        except Exception as exc:
            log.error("%s: %s", sid, exc)
            status = 1
            continue
        lines.append(" ".join([sid] + [f"{s + 1}:{e + 1}" for s, e in result.segments]))
    _emit("".join(line + "\n" for line in lines), args.output)
    return status


def cmd_encode(args):
    _require(args, "input", "output")
    truth = parse_annotations(args.gt) if args.gt else None
    params = None if truth is not None else _seg_params(args)
    paths = discover_inputs(args.input)
    if not paths:
        raise FileNotFoundError(f"no sequences found under {args.input}")
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rows, status = [], 0
    for path in paths:
        sid = sequence_id(path)
        try:
            intervals = None
            if truth is not None:
                if sid not in truth:
                    raise KeyError(f"no ground truth for {sid}")
                intervals = truth[sid]
            rows.extend(encode_sequence(load_sequence(path), sid, out, params, intervals))
        except Exception as exc:
            log.error("%s: %s", sid, exc)
            status = 1
    write_manifest(rows, out / "manifest.tsv")
    return status


def cmd_train(args):
    _require(args, "input", "model")
    model = train_from_manifest(args.input, int(args.side))
    save_model(model, args.model)
    log.info("stored %d templates over %d labels", len(model), len(model.label_set))
    return 0


def cmd_predict(args):
    _require(args, "input", "model")
    preds = predict_manifest(args.input, load_model(args.model))
    _emit(dumps_annotations(preds), args.output)
    return 0


def cmd_run(args):
    _require(args, "input", "model")
    config = PipelineConfig(
        params=_seg_params(args),
        input=Path(args.input),
        output=Path(args.output) if args.output else None,
        model=Path(args.model),
        jobs=int(args.jobs),
    )
    preds, failures = run_pipeline(config, load_model(config.model))
    _emit(dumps_annotations(preds), args.output)
    return 1 if failures else 0


def cmd_evaluate(args):
    _require(args, "gt", "pred", "lengths")
    report = mean_jaccard(
        parse_annotations(args.gt), parse_annotations(args.pred), parse_lengths(args.lengths)
    )
    sys.stdout.write(report.format())
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "segment": cmd_segment,
    "encode": cmd_encode,
    "train": cmd_train,
    "predict": cmd_predict,
    "run": cmd_run,
    "evaluate": cmd_evaluate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = read_config(args.config) if args.config else {}
        _resolve(args, config)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
