"""Brute-force reference implementations used as test oracles.

Written with plain Python loops and no numpy vectorisation so they share no
code path with the library.
"""

import math

import mpmath

from idmmgesture.evaluation import LabeledInterval


def qom_loop(a, b, threshold):
    h, w = len(a), len(a[0])
    count = 0
    for y in range(h):
        for x in range(w):
            if abs(int(a[y][x]) - int(b[y][x])) >= threshold:
                count += 1
    return count


def global_qom_loop(frames, threshold):
    return [qom_loop(f, frames[0], threshold) for f in frames]


def idmm_loop(frames):
    h, w = len(frames[0]), len(frames[0][0])
    out = [[0] * w for _ in range(h)]
    for f in frames:
        for y in range(h):
            for x in range(w):
                out[y][x] += abs(int(f[y][x]) - int(frames[0][y][x]))
    return out


def rainbow_mp(intensity, dps=50):
    with mpmath.workdps(dps):
        i = mpmath.mpf(intensity)
        theta = 4 * mpmath.pi * i / (3 * 255)
        return tuple(
            ((1 + mpmath.cos(theta - k * 2 * mpmath.pi / 3)) / 2) ** 2 for k in range(3)
        )


def refine_loop(profile, candidates, window):
    kept = []
    n_windows = (len(profile) + window - 1) // window
    for wi in range(n_windows):
        lo, hi = wi * window, (wi + 1) * window
        best = None
        for c in candidates:
            if lo <= c < hi and (best is None or profile[c] < profile[best]):
                best = c
        if best is not None:
            kept.append(best)
    return kept


def population_stats(values):
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


def frame_set(intervals):
    frames = set()
    for start, end in intervals:
        frames.update(range(start, end + 1))
    return frames


def jaccard_brute(gt, pred, horizons):
    """Mean Jaccard with Python sets; intervals are (start, end, label) 1-based."""
    scores = []
    for sid, gt_ivs in gt.items():
        pred_ivs = pred.get(sid, [])
        true_labels = {lab for _, _, lab in gt_ivs}
        labels = true_labels | {lab for _, _, lab in pred_ivs}
        total = 0.0
        for lab in labels:
            g = frame_set((s, e) for s, e, l in gt_ivs if l == lab)
            p = frame_set((s, e) for s, e, l in pred_ivs if l == lab)
            assert all(1 <= f <= horizons[sid] for f in g | p)
            union = g | p
            total += len(g & p) / len(union) if union else 0.0
        scores.append(total / len(true_labels))
    return sum(scores) / len(scores), scores


def l2_loop(a, b):
    return math.sqrt(sum((float(x) - float(y)) ** 2 for x, y in zip(a, b)))


def bilinear_loop(img, side):
    """Half-pixel-centred bilinear resize of an (h, w, 3) nested list."""
    h, w = len(img), len(img[0])

    def coord(o, n_in):
        p = (o + 0.5) * n_in / side - 0.5
        p = min(max(p, 0.0), n_in - 1)
        i0 = int(math.floor(p))
        return i0, min(i0 + 1, n_in - 1), p - i0

    out = []
    for c in range(3):
        for oy in range(side):
            y0, y1, fy = coord(oy, h)
            for ox in range(side):
                x0, x1, fx = coord(ox, w)
                top = img[y0][x0][c] * (1 - fx) + img[y0][x1][c] * fx
                bot = img[y1][x0][c] * (1 - fx) + img[y1][x1][c] * fx
                out.append(top * (1 - fy) + bot * fy)
    return out


def random_corpus(r, n_seq=None):
    """Ground truth (non-overlapping) and predictions (may overlap)."""
    gt, pred, horizons = {}, {}, {}
    for s in range(n_seq or int(r.integers(1, 6))):
        sid = f"s{s}"
        horizon = int(r.integers(1, 201))
        horizons[sid] = horizon
        cuts = sorted(set(r.integers(1, horizon + 1, int(r.integers(1, 8))).tolist()))
        ivs = []
        for a, b in zip(cuts[::2], cuts[1::2] + [horizon]):
            if a <= b and (not ivs or a > ivs[-1].end):
                ivs.append(LabeledInterval(a, b, int(r.integers(1, 7))))
        gt[sid] = ivs or [LabeledInterval(1, horizon, 1)]
        if r.random() < 0.85:
            p = []
            for _ in range(int(r.integers(0, 6))):
                a = int(r.integers(1, horizon + 1))
                b = int(r.integers(a, horizon + 1))
                p.append(LabeledInterval(a, b, int(r.integers(1, 7))))
            pred[sid] = p
    return gt, pred, horizons
