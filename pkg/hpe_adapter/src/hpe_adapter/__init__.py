"""Thin adapter from video to canonical 3D keypoint files."""

from hpe_adapter.config import (
    CANONICAL_JOINTS,
    AdapterConfig,
    ModelLoadError,
    UnmappedJoint,
    VideoDecodeError,
    load_mapping,
)
from hpe_adapter.extract import extract_keypoints
from hpe_adapter.render import render_marker_video

__all__ = [
    "CANONICAL_JOINTS",
    "AdapterConfig",
    "ModelLoadError",
    "UnmappedJoint",
    "VideoDecodeError",
    "load_mapping",
    "extract_keypoints",
    "render_marker_video",
]
