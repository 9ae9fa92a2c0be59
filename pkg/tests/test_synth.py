import numpy as np
import pytest

from idmmgesture.evaluation import check_ground_truth
from idmmgesture.qomseg import global_qom
from idmmgesture.synth import SynthConfig, balanced_labels, generate, generate_corpus, render_gesture


def test_no_gestures_no_noise_is_constant():
    out = generate(SynthConfig(gesture_count=0, neutral_gap=7))
    assert len(out.sequence) == 7
    assert (out.sequence.frames == out.neutral_frame).all()
    assert out.ground_truth == []


def test_same_seed_same_output():
    cfg = SynthConfig(noise_sigma=2.0, seed=11)
    a, b = generate(cfg), generate(cfg)
    assert a.sequence == b.sequence
    assert a.ground_truth == b.ground_truth
    assert generate(SynthConfig(noise_sigma=2.0, seed=12)).sequence != a.sequence


def test_layout_arithmetic():
    cfg = SynthConfig(gesture_count=3, neutral_gap=5, seed=3)
    out = generate(cfg)
    gt = out.ground_truth
    assert len(gt) == 3
    assert gt[0].start == 6
    for a, b in zip(gt, gt[1:]):
        assert b.start - a.end - 1 == 5
    assert len(out.sequence) == gt[-1].end + 5
    check_ground_truth(gt)
    lo, hi = cfg.gesture_length_range
    assert all(lo <= iv.end - iv.start + 1 <= hi for iv in gt)


def test_qom_zero_in_gaps_positive_in_gestures():
    out = generate(SynthConfig(gesture_count=4, neutral_gap=4, seed=8))
    prof = global_qom(out.sequence, 60)
    inside = np.zeros(len(prof), bool)
    for iv in out.ground_truth:
        inside[iv.start - 1 : iv.end] = True
        # interior frames all move; the edge frames are the rest pose
        assert (prof[iv.start : iv.end - 1] > 0).all()
        assert prof[iv.start - 1] == 0 and prof[iv.end - 1] == 0
    assert (prof[~inside] == 0).all()


def test_peak_covers_ten_percent_at_amplitude():
    cfg = SynthConfig()
    block = render_gesture(3, 40, cfg)
    # the first frame is the rest pose; the hand moves towards the camera
    dev = block[0] - block
    assert dev.min() >= 0
    assert ((dev == cfg.amplitude).reshape(40, -1).mean(axis=1) >= 0.10).any()


def test_label_determinism_and_distinctness():
    cfg = SynthConfig()
    a = render_gesture(5, 30, cfg)
    b = render_gesture(5, 30, SynthConfig(seed=99, noise_sigma=0))
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, render_gesture(6, 30, cfg))
    assert not np.array_equal(a, render_gesture(5, 30, SynthConfig(style_seed=1)))


def test_noise_is_clamped():
    out = generate(SynthConfig(neutral_depth=2, amplitude=1, noise_sigma=50.0, gesture_count=1))
    assert out.sequence.frames.dtype == np.uint16


def test_balanced_label_stream():
    r = np.random.default_rng(0)
    stream = balanced_labels(range(1, 11), 25, r)
    counts = np.bincount(stream, minlength=11)[1:]
    assert counts.min() == 2 and counts.max() == 3


def test_corpus_covers_every_label():
    corpus = generate_corpus(SynthConfig(), 5, "tr")
    assert [sid for sid, _ in corpus] == ["tr000", "tr001", "tr002", "tr003", "tr004"]
    labels = {iv.label for _, out in corpus for iv in out.ground_truth}
    assert labels == set(range(1, 11))
    assert corpus[0][1].sequence.source_id == "tr000"


@pytest.mark.parametrize(
    "kwargs",
    [
        {"labels": ()},
        {"gesture_length_range": (10, 5)},
        {"gesture_length_range": (3, 5)},
        {"amplitude": 0},
        {"gesture_count": 0, "neutral_gap": 0},
        {"sequence_labels": (0,)},
    ],
)
def test_invalid_configs(kwargs):
    with pytest.raises(ValueError):
        SynthConfig(**kwargs)
