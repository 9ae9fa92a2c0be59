"""End-to-end composition: segment, encode, classify, emit intervals."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .classify import TemplateModel, predict, train
from .depthio import export_png, load_sequence, read_png
from .evaluation import LabeledInterval
from .idmm import encode_segment
from .qomseg import SegmentationParams, segment

log = logging.getLogger(__name__)

MANIFEST_FIELDS = ("sequence_id", "segment", "start", "end", "label", "path")


@dataclass(frozen=True)
class PipelineConfig:
    params: SegmentationParams
    input: Path
    output: Path | None = None
    model: Path | None = None
    side: int = 32
    jobs: int = 1

    def __post_init__(self):
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.side < 1:
            raise ValueError("side must be >= 1")


def discover_inputs(path) -> list:
    """Sequence sources under ``path``, in lexicographic order.

    ``path`` may be a ``.dseq`` file, a directory of PGM frames, or a
    directory holding ``.dseq`` files and/or PGM frame subdirectories.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input {path} does not exist")
    if path.is_file():
        return [path]
    if any(p.suffix.lower() == ".pgm" for p in path.iterdir()):
        return [path]
    found = []
    for p in sorted(path.iterdir()):
        if p.is_file() and p.suffix.lower() == ".dseq":
            found.append(p)
        elif p.is_dir() and any(q.suffix.lower() == ".pgm" for q in p.iterdir()):
            found.append(p)
    return found


def sequence_id(path) -> str:
    path = Path(path)
    return path.stem if path.is_file() else path.name


def label_segments(seq, params: SegmentationParams, model: TemplateModel) -> list:
    """Segment one sequence and classify each segment (1-based intervals)."""
    result = segment(seq, params)
    out = []
    for start, end in result.segments:
        label, _ = predict(model, encode_segment(seq.slice(start, end)))
        out.append(LabeledInterval(start + 1, end + 1, label))
    return out


def _run_one(task):
    path, params, model = task
    sid = sequence_id(path)
    try:
        return sid, label_segments(load_sequence(path), params, model), None
    except Exception as exc:  # reported per sequence, the batch continues
        return sid, None, f"{type(exc).__name__}: {exc}"


def run_pipeline(config: PipelineConfig, model: TemplateModel):
    """Predict labelled intervals for every input sequence.

    Returns ``(predictions, failures)`` where ``predictions`` maps sequence
    id to intervals in input order and ``failures`` maps sequence id to an
    error message.  Output does not depend on ``config.jobs``.
    """
    paths = discover_inputs(config.input)
    if not paths:
        raise FileNotFoundError(f"no sequences found under {config.input}")
    tasks = [(p, config.params, model) for p in paths]
    if config.jobs == 1 or len(tasks) == 1:
        results = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    predictions, failures = {}, {}
    for sid, intervals, err in results:
        if err is not None:
            log.error("%s: %s", sid, err)
            failures[sid] = err
        else:
            predictions[sid] = intervals
    return predictions, failures


# --------------------------------------------------------------------------
# encode / train via PNG manifests


def write_manifest(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(MANIFEST_FIELDS)
        for row in rows:
            writer.writerow([row.get(k, "") for k in MANIFEST_FIELDS])


def read_manifest(path) -> list:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        missing = set(MANIFEST_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: manifest lacks columns {sorted(missing)}")
        rows = list(reader)
    for row in rows:
        row["path"] = str(path.parent / row["path"])
    return rows


def encode_sequence(seq, sid, out_dir, params=None, intervals=None) -> list:
    """Write one PNG per segment and return the manifest rows.

    Segments come from ``intervals`` (1-based ground truth, labelled) when
    given, otherwise from QOM segmentation with ``params``.
    """
    out_dir = Path(out_dir)
    if intervals is None:
        spans = [(s + 1, e + 1, "") for s, e in segment(seq, params).segments]
    else:
        spans = [(iv.start, iv.end, iv.label) for iv in intervals]
    rows = []
    for k, (start, end, label) in enumerate(spans):
        name = f"{sid}_{k:03d}.png"
        export_png(encode_segment(seq.slice(start - 1, end - 1)), out_dir / name)
        rows.append(
            {"sequence_id": sid, "segment": k, "start": start, "end": end,
             "label": label, "path": name}
        )
    return rows


def train_from_manifest(path, side: int = 32) -> TemplateModel:
    rows = read_manifest(path)
    samples = []
    for row in rows:
        if not row["label"]:
            raise ValueError(f"{path}: row for {row['path']} has no label")
        samples.append((read_png(row["path"]), int(row["label"])))
    return train(samples, side)


def predict_manifest(path, model: TemplateModel) -> dict:
    out = {}
    for row in read_manifest(path):
        label, _ = predict(model, read_png(row["path"]))
        out.setdefault(row["sequence_id"], []).append(
            LabeledInterval(int(row["start"]), int(row["end"]), label)
        )
    return out
