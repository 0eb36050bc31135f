"""Shot boundary detection by texture split-and-merge."""

__version__ = "0.1.0"

from .evaluation import EvalReport, GroundTruth, match_boundaries, score
from .fld import CriterionValue, criterion_J
from .frame_repr import RepresentativeMatrix, frame_representative
from .ingest import GrayFrame, load_frames
from .pipeline import Config, DetectionResult, detect_shots
from .segmenter import Segment, Segmentation

__all__ = [
    "Config",
    "CriterionValue",
    "DetectionResult",
    "EvalReport",
    "GrayFrame",
    "GroundTruth",
    "RepresentativeMatrix",
    "Segment",
    "Segmentation",
    "criterion_J",
    "detect_shots",
    "frame_representative",
    "load_frames",
    "match_boundaries",
    "score",
]
