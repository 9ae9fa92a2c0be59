"""Improved Depth Motion Maps and power-rainbow pseudo-coloring.

An IDMM accumulates, per pixel, the unthresholded absolute depth difference
between every frame of a segment and a neutral frame (by default the
segment's first frame).  It is min-max mapped to intensities in [0, 255]
and each intensity is turned into RGB with a cosine-squared rainbow whose
red, green and blue lobes peak at 0, 127.5 and 255.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .validation import check_depth_frame, frames_of

_PHASE = 4.0 * np.pi / (3.0 * 255.0)
_OFFSETS = np.array([0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0])


def build_idmm(segment, neutral=None) -> np.ndarray:
    """Sum of ``|frame_i - neutral|`` over the segment, as ``uint64``.

    ``neutral`` defaults to the first frame of the segment.
    """
    frames = frames_of(segment)
    ref = frames[0] if neutral is None else check_depth_frame(neutral)
    if ref.shape != frames.shape[1:]:
        raise ValueError(f"neutral frame shape {ref.shape} != frame shape {frames.shape[1:]}")
    ref = ref.astype(np.int32)
    acc = np.zeros(ref.shape, dtype=np.uint64)
    for frame in frames:
        acc += np.abs(frame.astype(np.int32) - ref).astype(np.uint64)
    return acc


def normalize(idmm) -> np.ndarray:
    """Map ``[min, max]`` of the map linearly onto ``[0, 255]``.

    A constant map becomes all zeros.
    """
    x = np.asarray(idmm, dtype=np.float64)
    lo = x.min()
    hi = x.max()
    if not hi > lo:
        return np.zeros(x.shape, dtype=np.float64)
    out = 255.0 * ((x - lo) / (hi - lo))
    # guard the endpoints against division round-off
    return np.clip(out, 0.0, 255.0)


def rainbow(intensity):
    """Normalized ``(R, G, B)`` in [0, 1] for intensities in [0, 255].

    Scalars give a length-3 array; an array of shape ``s`` gives ``s + (3,)``.
    """
    i = np.asarray(intensity, dtype=np.float64)
    if np.any(~np.isfinite(i)) or np.any(i < 0) or np.any(i > 255):
        raise ValueError("intensity must lie in [0, 255]")
    theta = _PHASE * i[..., None] - _OFFSETS
    return ((1.0 + np.cos(theta)) / 2.0) ** 2


def colorize(intensity_map) -> np.ndarray:
    """Pseudo-color an intensity map into an ``(h, w, 3)`` uint8 image."""
    rgb = rainbow(intensity_map)
    # round half up
    return np.floor(255.0 * rgb + 0.5).astype(np.uint8)


def encode_segment(segment, neutral=None) -> np.ndarray:
    return colorize(normalize(build_idmm(segment, neutral)))


class IdmmEncoder(TransformerMixin, BaseEstimator):
    """Transform depth segments into pseudo-colored IDMM images.

    Stateless; ``fit`` only exists for pipeline compatibility.
    """

    def __init__(self, neutral=None):
        self.neutral = neutral

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return [encode_segment(seg, self.neutral) for seg in X]
