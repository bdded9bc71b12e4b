"""Adapter configuration and joint-name mapping."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

CANONICAL_JOINTS = (
    "pelvis",
    "spine",
    "l_hip",
    "r_hip",
    "l_knee",
    "r_knee",
    "l_ankle",
    "r_ankle",
)

# default mapping for a 17-joint Human3.6M-style lifter skeleton; the
# pelvis root and mid-spine joints stand in for the canonical trunk pair
H36M17_TO_CANONICAL = {
    "pelvis": "pelvis",
    "spine": "spine",
    "left_hip": "l_hip",
    "right_hip": "r_hip",
    "left_knee": "l_knee",
    "right_knee": "r_knee",
    "left_ankle": "l_ankle",
    "right_ankle": "r_ankle",
}

# scale normalization target: mean hip-to-knee distance in meters
THIGH_LENGTH_M = 0.45


class UnmappedJoint(Exception):
    """The mapping table does not cover a canonical joint."""


class ModelLoadError(Exception):
    """A requested model stack is not available locally."""


class VideoDecodeError(Exception):
    """The input video cannot be opened or decoded."""


@dataclass
class AdapterConfig:
    video: str
    out: str
    detector: str = "marker"
    pose2d: str = "marker"
    lifter: str = "planar"
    fps: float | None = None  # override; otherwise read from the container
    mapping: dict[str, str] = field(default_factory=lambda: dict(H36M17_TO_CANONICAL))

    def __post_init__(self):
        if self.fps is not None and self.fps <= 0:
            raise ValueError("fps override must be > 0")
        covered = set(self.mapping.values())
        missing = [j for j in CANONICAL_JOINTS if j not in covered]
        if missing:
            raise UnmappedJoint(f"mapping does not cover: {', '.join(missing)}")


def load_mapping(path) -> dict[str, str]:
    mapping = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(mapping, dict):
        raise UnmappedJoint("mapping file must be a JSON object of model->canonical names")
    return {str(k): str(v) for k, v in mapping.items()}
