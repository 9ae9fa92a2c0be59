"""Nearest-template gesture classifier over pseudo-colored IDMMs.

Images are reduced to ``side x side`` bilinear thumbnails and flattened
channel-major (all red values row by row, then green, then blue).  A query
gets the label of the stored template at the smallest Euclidean distance;
exact ties go to the smallest label, then to the earliest template.

The model file is little-endian: ``b"IDNN"``, version ``u16``, side ``u16``,
template count ``u32``, then per template a ``u32`` label followed by
``3 * side**2`` ``float32`` feature values.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .depthio import FormatError
from .validation import check_positive_int, check_rgb_image

MODEL_MAGIC = b"IDNN"
MODEL_VERSION = 1
_MODEL_HEADER = struct.Struct("<4sHHI")
MODEL_HEADER_SIZE = _MODEL_HEADER.size  # 12


def _resample_axis(n_in, n_out):
    """Source indices and weights for half-pixel-centred linear resampling."""
    pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    i0 = np.floor(pos).astype(np.intp)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, pos - i0


def downsample(img, side: int = 32) -> np.ndarray:
    """Bilinear ``side x side`` thumbnail, flattened channel-major (float64)."""
    side = check_positive_int(side, "side")
    img = check_rgb_image(img).astype(np.float64)
    h, w, _ = img.shape
    y0, y1, wy = _resample_axis(h, side)
    x0, x1, wx = _resample_axis(w, side)
    wy = wy[:, None, None]
    wx = wx[None, :, None]
    top = img[y0][:, x0] * (1 - wx) + img[y0][:, x1] * wx
    bottom = img[y1][:, x0] * (1 - wx) + img[y1][:, x1] * wx
    thumb = top * (1 - wy) + bottom * wy
    return np.transpose(thumb, (2, 0, 1)).reshape(-1)


def nearest_template(features, labels, query):
    """Index and distance of the winning template for one query vector."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    query = np.asarray(query, dtype=np.float64)
    sq = np.sum((features - query) ** 2, axis=1)
    tied = np.flatnonzero(sq == sq.min())
    # lexsort: last key is primary
    best = tied[np.lexsort((tied, labels[tied]))[0]]
    return int(best), float(np.sqrt(sq[best]))


@dataclass(frozen=True, eq=False)
class TemplateModel:
    side: int
    labels: np.ndarray
    features: np.ndarray

    def __post_init__(self):
        side = check_positive_int(self.side, "side")
        labels = np.asarray(self.labels, dtype=np.uint32).reshape(-1)
        features = np.asarray(self.features, dtype=np.float32)
        if labels.size == 0:
            raise ValueError("a template model needs at least one template")
        if features.shape != (labels.size, 3 * side * side):
            raise ValueError(
                f"features have shape {features.shape}, expected {(labels.size, 3 * side * side)}"
            )
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "features", features)

    def __len__(self):
        return self.labels.size

    def __eq__(self, other):
        if not isinstance(other, TemplateModel):
            return NotImplemented
        return (
            self.side == other.side
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.features, other.features)
        )

    @property
    def label_set(self):
        return sorted(set(self.labels.tolist()))


def train(samples, side: int = 32) -> TemplateModel:
    """Memorize the thumbnail of every ``(image, label)`` sample."""
    samples = list(samples)
    if not samples:
        raise ValueError("cannot train on an empty sample list")
    labels = [int(label) for _, label in samples]
    feats = np.stack([downsample(img, side) for img, _ in samples])
    return TemplateModel(side, labels, feats)


def predict(model: TemplateModel, img):
    """``(label, distance)`` of the nearest stored template."""
    idx, dist = nearest_template(model.features, model.labels, downsample(img, model.side))
    return int(model.labels[idx]), dist


def dumps_model(model: TemplateModel) -> bytes:
    header = _MODEL_HEADER.pack(MODEL_MAGIC, MODEL_VERSION, model.side, len(model))
    dim = 3 * model.side * model.side
    rec = np.dtype([("label", "<u4"), ("feature", "<f4", (dim,))])
    records = np.empty(len(model), dtype=rec)
    records["label"] = model.labels
    records["feature"] = model.features
    return header + records.tobytes()


def loads_model(buf: bytes) -> TemplateModel:
    if len(buf) < MODEL_HEADER_SIZE:
        raise FormatError("truncated model header")
    magic, version, side, count = _MODEL_HEADER.unpack_from(buf)
    if magic != MODEL_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MODEL_MAGIC!r}")
    if version != MODEL_VERSION:
        raise FormatError(f"unsupported model version {version}")
    if side == 0 or count == 0:
        raise FormatError("model declares zero side or zero templates")
    dim = 3 * side * side
    rec = np.dtype([("label", "<u4"), ("feature", "<f4", (dim,))])
    body = len(buf) - MODEL_HEADER_SIZE
    if body != count * rec.itemsize:
        raise FormatError(
            f"model body is {body} bytes, expected {count} records of {rec.itemsize} bytes"
        )
    records = np.frombuffer(buf, dtype=rec, count=count, offset=MODEL_HEADER_SIZE)
    return TemplateModel(side, records["label"].copy(), records["feature"].copy())


def save_model(model: TemplateModel, path) -> None:
    Path(path).write_bytes(dumps_model(model))


def load_model(path) -> TemplateModel:
    return loads_model(Path(path).read_bytes())


class NearestTemplateClassifier(ClassifierMixin, BaseEstimator):
    """Scikit-learn facade over :func:`train` / :func:`predict`.

    ``X`` is a sequence of ``(h, w, 3)`` uint8 images (sizes may differ),
    ``y`` the positive integer gesture labels.
    """

    def __init__(self, side=32):
        self.side = side

    def fit(self, X, y):
        X = list(X)
        y = np.asarray(y)
        if len(X) != y.shape[0]:
            raise ValueError(f"{len(X)} images but {y.shape[0]} labels")
        self.model_ = train(zip(X, y.tolist()), self.side)
        self.classes_ = np.asarray(self.model_.label_set)
        return self

    @classmethod
    def from_model(cls, model: TemplateModel):
        clf = cls(side=model.side)
        clf.model_ = model
        clf.classes_ = np.asarray(model.label_set)
        return clf

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("NearestTemplateClassifier is not fitted yet")

    def predict_with_distance(self, X):
        self._check_fitted()
        out = [predict(self.model_, img) for img in X]
        labels = np.asarray([lab for lab, _ in out], dtype=np.int64)
        dists = np.asarray([d for _, d in out], dtype=np.float64)
        return labels, dists

    def predict(self, X):
        return self.predict_with_distance(X)[0]
