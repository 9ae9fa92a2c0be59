"""Temporal Jaccard scoring and the annotation text format.

Annotation files hold one line per sequence::

    <sequence_id> <start>:<end>:<label> [<start>:<end>:<label> ...]

Frames are 1-based and inclusive; labels are positive integers.  Sequence
length files hold ``<sequence_id> <frame_count>`` per line.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np


class AnnotationError(ValueError):
    pass


class LabeledInterval(NamedTuple):
    start: int
    end: int
    label: int


def make_interval(start, end, label) -> LabeledInterval:
    start, end, label = int(start), int(end), int(label)
    if start < 1:
        raise AnnotationError(f"start frame {start} < 1")
    if start > end:
        raise AnnotationError(f"start {start} > end {end}")
    if label < 1:
        raise AnnotationError(f"label {label} is not positive")
    return LabeledInterval(start, end, label)


@dataclass(frozen=True)
class JaccardReport:
    per_sequence: dict
    mean: float

    def format(self) -> str:
        lines = [f"{sid} {score:.6f}" for sid, score in self.per_sequence.items()]
        lines.append(f"mean {self.mean:.6f}")
        return "\n".join(lines) + "\n"


def _indicator(intervals, horizon):
    v = np.zeros(horizon, dtype=bool)
    for iv in intervals:
        if iv[0] < 1 or iv[1] > horizon:
            raise AnnotationError(f"interval {iv[0]}:{iv[1]} exceeds horizon {horizon}")
        v[iv[0] - 1 : iv[1]] = True
    return v


def jaccard_class(gt, pred, horizon: int) -> float:
    """Frame-level intersection over union of two interval lists.

    Both lists are taken to carry the same class.  Two empty lists score 0.
    """
    g = _indicator(gt, horizon)
    p = _indicator(pred, horizon)
    union = np.count_nonzero(g | p)
    if union == 0:
        return 0.0
    return np.count_nonzero(g & p) / union


def check_ground_truth(intervals, sequence_id=""):
    ordered = sorted(intervals)
    for a, b in zip(ordered, ordered[1:]):
        if b.start <= a.end:
            raise AnnotationError(
                f"{sequence_id}: ground-truth intervals {a.start}:{a.end} and "
                f"{b.start}:{b.end} overlap"
            )


def jaccard_sequence(gt, pred, horizon: int) -> float:
    """Per-sequence score: class Jaccards summed, divided by true label count."""
    true_labels = {iv.label for iv in gt}
    if not true_labels:
        raise AnnotationError("ground truth for the sequence is empty")
    total = 0.0
    for label in sorted(true_labels | {iv.label for iv in pred}):
        total += jaccard_class(
            [iv for iv in gt if iv.label == label],
            [iv for iv in pred if iv.label == label],
            horizon,
        )
    return total / len(true_labels)


def mean_jaccard(gt: dict, pred: dict, horizons: dict) -> JaccardReport:
    """Mean of per-sequence scores over every ground-truth sequence.

    Sequences missing from ``pred`` count as empty predictions.
    """
    if not gt:
        raise AnnotationError("ground truth is empty")
    per_sequence = {}
    for sid, intervals in gt.items():
        if sid not in horizons:
            raise AnnotationError(f"no sequence length for {sid!r}")
        check_ground_truth(intervals, sid)
        per_sequence[sid] = jaccard_sequence(intervals, pred.get(sid, []), int(horizons[sid]))
    return JaccardReport(per_sequence, float(np.mean(list(per_sequence.values()))))


# --------------------------------------------------------------------------
# text formats


def loads_annotations(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        fields = line.split()
        if not fields:
            continue
        sid, items = fields[0], fields[1:]
        if sid in out:
            raise AnnotationError(f"line {lineno}: duplicate sequence id {sid!r}")
        intervals = []
        for item in items:
            parts = item.split(":")
            if len(parts) != 3:
                raise AnnotationError(f"line {lineno}: malformed interval {item!r}")
            try:
                intervals.append(make_interval(*(int(p) for p in parts)))
            except ValueError as exc:
                raise AnnotationError(f"line {lineno}: {exc}") from None
        out[sid] = intervals
    return out


def dumps_annotations(annotations: dict) -> str:
    lines = []
    for sid, intervals in annotations.items():
        if not sid or any(c.isspace() for c in sid):
            raise AnnotationError(f"invalid sequence id {sid!r}")
        items = [f"{iv[0]}:{iv[1]}:{iv[2]}" for iv in intervals]
        lines.append(" ".join([sid, *items]))
    return "".join(line + "\n" for line in lines)


def parse_annotations(path) -> dict:
    return loads_annotations(Path(path).read_text(encoding="utf-8"))


def write_annotations(annotations: dict, path) -> None:
    Path(path).write_text(dumps_annotations(annotations), encoding="utf-8")


def parse_lengths(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 2:
            raise AnnotationError(f"line {lineno}: expected '<sequence_id> <frames>'")
        try:
            n = int(fields[1])
        except ValueError:
            raise AnnotationError(f"line {lineno}: bad frame count {fields[1]!r}") from None
        if n < 1:
            raise AnnotationError(f"line {lineno}: frame count must be positive")
        out[fields[0]] = n
    return out


def write_lengths(lengths: dict, path) -> None:
    text = "".join(f"{sid} {int(n)}\n" for sid, n in lengths.items())
    Path(path).write_text(text, encoding="utf-8")
