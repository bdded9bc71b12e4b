"""Keypoint geometry: joint angles from 3D landmarks plus label smoothing."""

from gaitkin.geometry.angles import (
    CANONICAL_JOINTS,
    JointAngleFrame,
    Keypoint3D,
    KeypointFrame,
    angle_between,
    hip_angle,
    knee_angle,
    to_flexion_convention,
)
from gaitkin.geometry.savgol import SavGolSpec, savgol_coefficients, savgol_filter
from gaitkin.geometry.labels import extract_angle_labels
from gaitkin.geometry.io import (
    read_angle_file,
    read_keypoint_file,
    write_angle_file,
    write_keypoint_file,
)

__all__ = [
    "CANONICAL_JOINTS",
    "Keypoint3D",
    "KeypointFrame",
    "JointAngleFrame",
    "SavGolSpec",
    "angle_between",
    "hip_angle",
    "knee_angle",
    "to_flexion_convention",
    "savgol_coefficients",
    "savgol_filter",
    "extract_angle_labels",
    "read_keypoint_file",
    "write_keypoint_file",
    "read_angle_file",
    "write_angle_file",
]
