"""Input validation helpers shared by the estimators and free functions."""

from __future__ import annotations

import numpy as np


def _as_uint16(arr, what):
    arr = np.asarray(arr)
    if arr.dtype == np.uint16:
        return arr
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise TypeError(f"{what} must hold whole-number depth samples")
    elif arr.dtype.kind not in "iub":
        raise TypeError(f"{what} must hold integer depth samples, got dtype {arr.dtype}")
    if arr.size and (arr.min() < 0 or arr.max() > 65535):
        raise ValueError(f"{what} has samples outside the 16-bit range")
    return arr.astype(np.uint16)


def check_depth_frame(frame) -> np.ndarray:
    """Return ``frame`` as a ``(height, width)`` uint16 array."""
    frame = _as_uint16(frame, "depth frame")
    if frame.ndim != 2:
        raise ValueError(f"depth frame must be 2-D, got shape {frame.shape}")
    if frame.shape[0] < 1 or frame.shape[1] < 1:
        raise ValueError("depth frame has a zero dimension")
    return frame


def check_depth_frames(frames) -> np.ndarray:
    """Return a private ``(n_frames, height, width)`` uint16 copy.

    A list of frames is stacked; mismatched frame shapes are rejected.
    """
    if isinstance(frames, (list, tuple)):
        if not frames:
            raise ValueError("a depth sequence needs at least one frame")
        frames = [check_depth_frame(f) for f in frames]
        shape = frames[0].shape
        for i, f in enumerate(frames):
            if f.shape != shape:
                raise ValueError(f"frame {i} has shape {f.shape}, expected {shape}")
        frames = np.stack(frames)
    frames = np.array(_as_uint16(frames, "depth sequence"), dtype=np.uint16, copy=True)
    if frames.ndim != 3:
        raise ValueError(f"depth sequence must be 3-D (n, h, w), got shape {frames.shape}")
    if frames.shape[0] < 1:
        raise ValueError("a depth sequence needs at least one frame")
    if frames.shape[1] < 1 or frames.shape[2] < 1:
        raise ValueError("depth frames have a zero dimension")
    return frames


def check_rgb_image(img) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) RGB image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image has a zero dimension")
    if img.dtype != np.uint8:
        if img.dtype.kind not in "iu" or img.min() < 0 or img.max() > 255:
            raise ValueError("RGB channels must be 8-bit integers")
        img = img.astype(np.uint8)
    return img


def check_positive_int(value, name, minimum=1) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def frames_of(seq) -> np.ndarray:
    """Accept a DepthSequence or a bare array-like and return the frame stack."""
    frames = getattr(seq, "frames", None)
    if frames is not None:
        return frames
    return check_depth_frames(seq)
