"""Camera-frame translation under a bandwidth budget."""

from .corpus import pool_corpus, pool_frame, write_corpus
from .frames import BINARY, COLOR, GRAY, ImageFrame, bits_required
from .information import entropy, expected_preserved_info, mutual_information, preserved_info
from .pnm import PNMError
from .selection import ChannelBudget, Selection, evaluate_candidates, select_transform
from .transforms import (
    OtsuFallbackWarning,
    TransformSpec,
    apply_transform,
    binarize,
    downsample,
    edge_detect,
    otsu_threshold,
    parse_pipeline,
    pipeline_name,
    to_grayscale,
    upsample_to,
)

__all__ = [
    "BINARY", "COLOR", "GRAY", "ChannelBudget", "ImageFrame", "OtsuFallbackWarning",
    "PNMError", "Selection", "TransformSpec", "apply_transform", "binarize",
    "bits_required", "downsample", "edge_detect", "entropy", "evaluate_candidates",
    "expected_preserved_info", "mutual_information", "otsu_threshold", "parse_pipeline",
    "pipeline_name", "pool_corpus", "pool_frame", "preserved_info", "select_transform",
    "to_grayscale", "upsample_to", "write_corpus",
]
