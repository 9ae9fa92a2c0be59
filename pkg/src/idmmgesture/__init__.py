"""Continuous gesture recognition from depth-map sequences.

QOM temporal segmentation, Improved Depth Motion Maps with power-rainbow
pseudo-coloring, a nearest-template classifier and temporal Jaccard scoring.
"""

from .classify import NearestTemplateClassifier, TemplateModel, load_model, save_model
from .depthio import DepthSequence, load_dseq, load_pgm_dir, save_dseq
from .evaluation import LabeledInterval, mean_jaccard
from .idmm import IdmmEncoder, build_idmm, colorize, encode_segment, normalize, rainbow
from .qomseg import QomSegmenter, SegmentationParams, global_qom, segment

__version__ = "0.1.0"

__all__ = [
    "DepthSequence",
    "IdmmEncoder",
    "LabeledInterval",
    "NearestTemplateClassifier",
    "QomSegmenter",
    "SegmentationParams",
    "TemplateModel",
    "build_idmm",
    "colorize",
    "encode_segment",
    "global_qom",
    "load_dseq",
    "load_model",
    "load_pgm_dir",
    "mean_jaccard",
    "normalize",
    "rainbow",
    "save_dseq",
    "save_model",
    "segment",
]
