"""Quantity-of-movement (QOM) temporal segmentation of depth sequences.

The QOM of a frame against a reference is the number of pixels whose
absolute depth difference reaches ``pixel_threshold``.  The *global* QOM
profile compares every frame with frame 0.  Frames whose global QOM falls
below a threshold estimated from the start and end of the sequence are
candidate delimiters; a tumbling window of ``L // window_divisor`` frames
then keeps the lowest-QOM candidate per window.

Delimiter convention: consecutive segments share their boundary frame, so
``delimiters = [0, d1, d2, ..., last]`` yields segments
``(0, d1), (d1, d2), ..., (dm, last)`` (0-based, inclusive).  A shared
frame belongs to both neighbouring segments and to no others.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .validation import check_depth_frame, frames_of

# QOM values are pixel counts; a statistical threshold at or below zero
# would admit no frame at all, so zero-motion frames always qualify.
MIN_CANDIDATE_THRESHOLD = 1.0


class DegenerateInputError(ValueError):
    """Profile too short for the boundary-window threshold statistics."""


@dataclass(frozen=True)
class SegmentationParams:
    mean_gesture_length: int
    pixel_threshold: int = 60
    boundary_fraction: float = 0.125
    window_divisor: float = 2
    consolidate_runs: bool = True

    def __post_init__(self):
        if self.pixel_threshold < 1:
            raise ValueError("pixel_threshold must be >= 1")
        if not 0 < self.boundary_fraction < 0.5:
            raise ValueError("boundary_fraction must lie in (0, 0.5)")
        if self.window_divisor < 1:
            raise ValueError("window_divisor must be >= 1")
        if self.mean_gesture_length < 2:
            raise ValueError("mean_gesture_length must be >= 2")

    @property
    def boundary_frames(self) -> int:
        return math.ceil(self.boundary_fraction * self.mean_gesture_length)

    @property
    def window(self) -> int:
        return max(1, math.floor(self.mean_gesture_length / self.window_divisor))


@dataclass(frozen=True)
class SegmentationResult:
    delimiters: tuple
    segments: tuple
    threshold: float = field(default=float("nan"), compare=False)
    profile: np.ndarray | None = field(default=None, compare=False, repr=False)

    @classmethod
    def from_delimiters(cls, delimiters, **extra):
        d = tuple(int(i) for i in delimiters)
        segs = tuple((d[k], d[k + 1]) for k in range(len(d) - 1))
        return cls(d, segs, **extra)


def qom_pair(a, b, pixel_threshold: int = 60) -> int:
    """Number of pixels where ``|a - b| >= pixel_threshold``."""
    a = check_depth_frame(a)
    b = check_depth_frame(b)
    if a.shape != b.shape:
        raise ValueError(f"frame shapes differ: {a.shape} vs {b.shape}")
    diff = np.abs(a.astype(np.int32) - b.astype(np.int32))
    return int(np.count_nonzero(diff >= pixel_threshold))


def global_qom(seq, pixel_threshold: int = 60) -> np.ndarray:
    """QOM of every frame against the first frame; ``int64`` array."""
    frames = frames_of(seq)
    ref = frames[0].astype(np.int32)
    out = np.empty(frames.shape[0], dtype=np.int64)
    # chunked to bound the int32 temporary for long sequences
    step = max(1, (1 << 22) // max(1, ref.size))
    for lo in range(0, frames.shape[0], step):
        chunk = frames[lo : lo + step].astype(np.int32)
        moved = np.abs(chunk - ref) >= pixel_threshold
        out[lo : lo + step] = moved.reshape(moved.shape[0], -1).sum(axis=1)
    return out


def candidate_threshold(profile, params: SegmentationParams) -> float:
    """Mean plus two population standard deviations of the boundary QOMs.

    The sample pools the first and last ``ceil(boundary_fraction * L)``
    profile values.  Raises :class:`DegenerateInputError` when the profile
    has fewer than twice that many entries.
    """
    profile = np.asarray(profile, dtype=np.float64)
    k = params.boundary_frames
    if profile.shape[0] < 2 * k:
        raise DegenerateInputError(
            f"profile of {profile.shape[0]} frames is shorter than 2 * {k}"
        )
    sample = np.concatenate([profile[:k], profile[-k:]])
    return float(sample.mean() + 2.0 * sample.std())


def refine_candidates(profile, candidates, window: int) -> np.ndarray:
    """Keep the minimum-QOM candidate within each tumbling window.

    Windows are ``[0, w), [w, 2w), ...``; ties go to the smallest index.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    profile = np.asarray(profile)
    cand = np.asarray(candidates, dtype=np.int64)
    if cand.size == 0:
        return cand
    kept = []
    bins = cand // window
    # candidates are sorted, so each window is a contiguous block
    starts = np.flatnonzero(np.r_[True, bins[1:] != bins[:-1]])
    for block in np.split(cand, starts[1:]):
        kept.append(block[np.argmin(profile[block])])
    return np.asarray(kept, dtype=np.int64)


def _consolidate(profile, candidates, refined, last):
    """Collapse refined delimiters that fall in the same run of candidates.

    A run of consecutive below-threshold frames is one rest period; when a
    window boundary splits it, refinement leaves two delimiters in it.  Runs
    reaching the first or last frame are represented by that endpoint.
    """
    if refined.size == 0:
        return refined
    run_id = np.cumsum(np.r_[0, np.diff(candidates) != 1])
    run_of = dict(zip(candidates.tolist(), run_id.tolist()))
    edge_runs = {run_of.get(0), run_of.get(last)} - {None}
    best = {}
    for idx in refined.tolist():
        r = run_of[idx]
        if r in edge_runs:
            continue
        cur = best.get(r)
        if cur is None or profile[idx] < profile[cur]:
            best[r] = idx
    return np.asarray(sorted(best.values()), dtype=np.int64)


def _merge_short(delimiters, min_length=2):
    d = list(delimiters)
    while len(d) > 2:
        lengths = [d[k + 1] - d[k] + 1 for k in range(len(d) - 1)]
        short = [k for k, n in enumerate(lengths) if n < min_length]
        if not short:
            break
        k = short[0]
        # drop the delimiter shared with the shorter neighbour
        left = lengths[k - 1] if k > 0 else math.inf
        right = lengths[k + 1] if k + 1 < len(lengths) else math.inf
        del d[k if left <= right else k + 1]
    return d


def segment(seq, params: SegmentationParams) -> SegmentationResult:
    """Split a multi-gesture depth sequence into gesture segments."""
    frames = frames_of(seq)
    n = frames.shape[0]
    if n < 4:
        raise ValueError(f"sequence of {n} frames is too short to segment (need >= 4)")
    profile = global_qom(frames, params.pixel_threshold)
    try:
        threshold = candidate_threshold(profile, params)
    except DegenerateInputError:
        threshold = float(profile.mean() + 2.0 * profile.std())
    effective = max(threshold, MIN_CANDIDATE_THRESHOLD)
    candidates = np.flatnonzero(profile < effective)
    refined = refine_candidates(profile, candidates, params.window)
    if params.consolidate_runs:
        refined = _consolidate(profile, candidates, refined, n - 1)
    delimiters = sorted({0, n - 1, *refined.tolist()})
    delimiters = _merge_short(delimiters)
    return SegmentationResult.from_delimiters(
        delimiters, threshold=threshold, profile=profile
    )


def mean_gesture_length(annotations) -> int:
    """Average interval length in frames, rounded half up.

    Accepts an annotation mapping (sequence id -> intervals) or a flat
    iterable of ``(start, end, ...)`` intervals.
    """
    if isinstance(annotations, dict):
        intervals = [iv for ivs in annotations.values() for iv in ivs]
    else:
        intervals = list(annotations)
    if not intervals:
        raise ValueError("cannot average an empty annotation set")
    total = sum(iv[1] - iv[0] + 1 for iv in intervals)
    count = len(intervals)
    return (2 * total + count) // (2 * count)


class QomSegmenter(BaseEstimator):
    """Estimator wrapper around :func:`segment`.

    ``fit`` derives the mean gesture length from training annotations unless
    ``mean_gesture_length`` is given explicitly; ``predict`` maps a list of
    depth sequences to :class:`SegmentationResult` objects.
    """

    def __init__(
        self,
        mean_gesture_length=None,
        pixel_threshold=60,
        boundary_fraction=0.125,
        window_divisor=2,
        consolidate_runs=True,
    ):
        self.mean_gesture_length = mean_gesture_length
        self.pixel_threshold = pixel_threshold
        self.boundary_fraction = boundary_fraction
        self.window_divisor = window_divisor
        self.consolidate_runs = consolidate_runs

    def fit(self, X=None, y=None):
        if self.mean_gesture_length is not None:
            length = int(self.mean_gesture_length)
        elif X is not None:
            length = mean_gesture_length(X)
        else:
            raise ValueError("need training annotations or an explicit mean_gesture_length")
        self.params_ = SegmentationParams(
            mean_gesture_length=length,
            pixel_threshold=self.pixel_threshold,
            boundary_fraction=self.boundary_fraction,
            window_divisor=self.window_divisor,
            consolidate_runs=self.consolidate_runs,
        )
        self.mean_gesture_length_ = length
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            from sklearn.exceptions import NotFittedError

            raise NotFittedError("QomSegmenter is not fitted yet; call fit first")

    def segment(self, seq) -> SegmentationResult:
        self._check_fitted()
        return segment(seq, self.params_)

    def predict(self, X):
        return [self.segment(seq) for seq in X]
