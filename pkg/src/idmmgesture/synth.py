"""Synthetic multi-gesture depth sequences with exact ground truth.

A sequence is laid out as ``gap, gesture, gap, gesture, ..., gap`` where
each gap repeats the neutral scene (a flat wall with a nearer torso) and
each gesture moves a disc-shaped "hand" in front of it.  The hand follows a
bent straight-line path whose heading and bend are fixed by the label and
``style_seed``, so two gestures with the same label differ only in
duration and noise.  The hand's depth offset ramps in and out over two
frames: the first and last frame of every gesture equal the neutral scene,
the next-to-edge frames carry half the amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .depthio import DepthSequence
from .evaluation import LabeledInterval

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
RAMP_FRAMES = 2


@dataclass(frozen=True)
class SynthConfig:
    width: int = 64
    height: int = 64
    gesture_count: int = 5
    labels: tuple = tuple(range(1, 11))
    neutral_depth: int = 2000
    gesture_length_range: tuple = (32, 48)
    neutral_gap: int = 6
    amplitude: int = 200
    noise_sigma: float = 0.0
    seed: int = 0
    style_seed: int = 0
    # explicit per-gesture labels; overrides gesture_count and random draws
    sequence_labels: tuple | None = field(default=None)

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise ValueError("frames must be at least 8x8")
        if not self.labels:
            raise ValueError("need at least one gesture label")
        if any(int(lab) < 1 for lab in self.labels):
            raise ValueError("labels must be positive integers")
        lo, hi = self.gesture_length_range
        if lo > hi:
            raise ValueError("gesture_length_range must satisfy min <= max")
        if lo < 2 * RAMP_FRAMES + 1:
            raise ValueError(f"gestures need at least {2 * RAMP_FRAMES + 1} frames")
        if self.amplitude < 1:
            raise ValueError("amplitude must be >= 1")
        if not 0 <= self.neutral_depth <= 65535:
            raise ValueError("neutral_depth outside the 16-bit range")
        if self.gesture_count < 0 or self.neutral_gap < 0 or self.noise_sigma < 0:
            raise ValueError("gesture_count, neutral_gap and noise_sigma must be >= 0")
        if self.gesture_count == 0 and self.sequence_labels is None and self.neutral_gap == 0:
            raise ValueError("configuration produces an empty sequence")
        if self.sequence_labels is not None:
            if not self.sequence_labels:
                raise ValueError("sequence_labels must not be empty")
            if any(int(lab) < 1 for lab in self.sequence_labels):
                raise ValueError("labels must be positive integers")


@dataclass(frozen=True, eq=False)
class SynthOutput:
    sequence: DepthSequence
    ground_truth: list
    neutral_frame: np.ndarray


def neutral_scene(width: int, height: int, depth: int) -> np.ndarray:
    scene = np.full((height, width), depth, dtype=np.int64)
    # torso: a nearer block in the lower middle
    x0, x1 = width // 4, width - width // 4
    y0 = height // 2
    scene[y0:, x0:x1] = max(0, depth - 300)
    return scene


def _trajectory(label, style_seed, width, height, radius):
    """Start point and the two path components for one label."""
    rng = np.random.default_rng([int(style_seed), int(label)])
    heading = 2.0 * math.pi * ((label * _GOLDEN) % 1.0) + rng.uniform(-0.1, 0.1)
    bend = (0.6 if label % 2 else -0.6) * (1.0 + 0.3 * rng.uniform(-1, 1))
    reach = 0.5 * (min(width, height) - 2 * radius)
    d1 = np.array([math.cos(heading), math.sin(heading)])
    d2 = np.array([-d1[1], d1[0]])
    centre = np.array([(width - 1) / 2.0, (height - 1) / 2.0])
    start = centre - 0.5 * reach * d1
    return start, reach * d1, reach * bend * d2


def render_gesture(label, length, config: SynthConfig, scene=None) -> np.ndarray:
    """Noise-free ``(length, h, w)`` int64 block for one gesture."""
    w, h = config.width, config.height
    if scene is None:
        scene = neutral_scene(w, h, config.neutral_depth)
    radius = 0.2 * min(w, h)
    start, along, across = _trajectory(label, config.style_seed, w, h, radius)
    yy, xx = np.mgrid[0:h, 0:w]
    lo = np.array([radius, radius])
    hi = np.array([w - 1 - radius, h - 1 - radius])
    block = np.empty((length, h, w), dtype=np.int64)
    for t in range(length):
        u = t / (length - 1)
        env = min(1.0, t / RAMP_FRAMES, (length - 1 - t) / RAMP_FRAMES)
        cx, cy = np.clip(start + u * along + math.sin(math.pi * u) * across, lo, hi)
        disc = (xx - cx) ** 2 + (yy - cy) ** 2 <= radius**2
        offset = int(round(config.amplitude * env))
        block[t] = scene - np.where(disc, offset, 0)
    return block


def balanced_labels(labels, count, rng) -> list:
    """``count`` labels drawn as concatenated random permutations of ``labels``."""
    labels = [int(lab) for lab in labels]
    out = []
    while len(out) < count:
        out.extend(rng.permutation(labels).tolist())
    return out[:count]


def generate(config: SynthConfig) -> SynthOutput:
    rng = np.random.default_rng(config.seed)
    if config.sequence_labels is not None:
        labels = [int(lab) for lab in config.sequence_labels]
    else:
        labels = balanced_labels(config.labels, config.gesture_count, rng)
    lo, hi = config.gesture_length_range
    lengths = [int(rng.integers(lo, hi + 1)) for _ in labels]

    scene = neutral_scene(config.width, config.height, config.neutral_depth)
    gap = np.broadcast_to(scene, (config.neutral_gap,) + scene.shape)
    blocks = [gap]
    truth = []
    pos = config.neutral_gap
    for label, length in zip(labels, lengths):
        blocks.append(render_gesture(label, length, config, scene))
        blocks.append(gap)
        truth.append(LabeledInterval(pos + 1, pos + length, label))
        pos += length + config.neutral_gap
    frames = np.concatenate(blocks).astype(np.float64)
    if config.noise_sigma > 0:
        frames += rng.normal(0.0, config.noise_sigma, size=frames.shape)
    frames = np.clip(np.rint(frames), 0, 65535).astype(np.uint16)
    return SynthOutput(
        DepthSequence(frames, source_id=f"synth{config.seed}"),
        truth,
        scene.astype(np.uint16),
    )


def generate_corpus(config: SynthConfig, count: int, prefix: str = "seq"):
    """``count`` sequences whose label stream is balanced across the corpus.

    Returns a list of ``(sequence_id, SynthOutput)``; sequence ``i`` is named
    ``f"{prefix}{i:03d}"`` and uses its own seed derived from ``config.seed``.
    """
    rng = np.random.default_rng([int(config.seed), 0x5EED])
    stream = balanced_labels(config.labels, count * config.gesture_count, rng)
    out = []
    for i in range(count):
        sid = f"{prefix}{i:03d}"
        seed = int(np.random.SeedSequence([int(config.seed), i]).generate_state(1)[0])
        chunk = stream[i * config.gesture_count : (i + 1) * config.gesture_count]
        cfg = replace(config, seed=seed, sequence_labels=tuple(chunk) or None)
        res = generate(cfg)
        seq = DepthSequence(res.sequence.frames, source_id=sid)
        out.append((sid, SynthOutput(seq, res.ground_truth, res.neutral_frame)))
    return out
