"""Joint angles from 3D skeletal keypoints.

Hip angle: angle between the pelvis-to-spine vector and the hip-to-knee
vector of one side. Knee angle: angle between the hip-to-knee vector and
the knee-to-ankle vector, so a straight leg reads 0 and the raw value is
already knee flexion.

The raw hip angle lives in [0, 180] (180 = standing straight). The signed
flexion convention maps it to 0 at standing, positive when the thigh is
anterior of the trunk line and negative when posterior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gaitkin.errors import DegenerateVector, MissingJoint

NORM_EPS = 1e-9

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


@dataclass(frozen=True)
class Keypoint3D:
    """One landmark position in meters, right-handed world frame."""

    x: float
    y: float
    z: float
    confidence: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError("keypoint coordinates must be finite")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)


@dataclass(frozen=True)
class KeypointFrame:
    """Timestamped set of named landmarks."""

    time_s: float
    joints: dict[str, Keypoint3D] = field(default_factory=dict)

    def is_complete(self) -> bool:
        return all(name in self.joints for name in CANONICAL_JOINTS)

    def position(self, name: str) -> np.ndarray:
        try:
            return self.joints[name].as_array()
        except KeyError:
            raise MissingJoint(name) from None


@dataclass(frozen=True)
class JointAngleFrame:
    """Timestamped lower-limb joint angles in degrees."""

    time_s: float
    r_hip: float
    l_hip: float
    r_knee: float
    l_knee: float

    def as_array(self) -> np.ndarray:
        return np.array([self.r_hip, self.l_hip, self.r_knee, self.l_knee], dtype=np.float64)

    def __post_init__(self):
        for v in (self.r_hip, self.l_hip, self.r_knee, self.l_knee):
            if not math.isfinite(v):
                raise ValueError("joint angles must be finite")


ANGLE_CHANNELS = ("r_hip", "l_hip", "r_knee", "l_knee")


def angle_between(u, v) -> float:
    """Unsigned angle between two 3-vectors, in degrees, range [0, 180].

    Equals arccos(u.v / (|u||v|)) but is evaluated as atan2(|u x v|, u.v),
    which stays accurate near 0 and 180 degrees where the arccos form
    loses half its digits; a straight leg must read 0 at tight tolerance
    for any orientation.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu <= NORM_EPS or nv <= NORM_EPS:
        raise DegenerateVector(f"vector norms ({nu:.3e}, {nv:.3e}) at or below {NORM_EPS}")
    cross = float(np.linalg.norm(np.cross(u, v)))
    return math.degrees(math.atan2(cross, float(np.dot(u, v))))


def hip_angle(frame: KeypointFrame, side: str) -> float:
    """Raw hip angle of one side: trunk line vs thigh line."""
    _check_side(side)
    pelvis = frame.position("pelvis")
    spine = frame.position("spine")
    hip = frame.position(f"{side[0]}_hip")
    knee = frame.position(f"{side[0]}_knee")
    return angle_between(spine - pelvis, knee - hip)


def knee_angle(frame: KeypointFrame, side: str) -> float:
    """Knee flexion of one side; straight leg gives 0."""
    _check_side(side)
    hip = frame.position(f"{side[0]}_hip")
    knee = frame.position(f"{side[0]}_knee")
    ankle = frame.position(f"{side[0]}_ankle")
    return angle_between(knee - hip, ankle - knee)


def to_flexion_convention(raw_hip: float, frame: KeypointFrame, side: str) -> float:
    """Map a raw hip angle to signed flexion/extension.

    Standing straight (raw 180) maps to 0. The sign comes from projecting
    the thigh vector onto the body's forward axis, built as
    (l_hip - r_hip) x trunk-up: anterior thigh = flexion (positive),
    posterior = extension (negative).
    """
    _check_side(side)
    if not 0.0 <= raw_hip <= 180.0:
        raise ValueError(f"raw hip angle {raw_hip} outside [0, 180]")
    l_hip = frame.position("l_hip")
    r_hip = frame.position("r_hip")
    trunk_up = frame.position("spine") - frame.position("pelvis")
    hip_axis = l_hip - r_hip
    if np.linalg.norm(hip_axis) <= NORM_EPS:
        raise DegenerateVector("left and right hips coincide; forward axis undefined")
    forward = np.cross(hip_axis, trunk_up)
    nf = float(np.linalg.norm(forward))
    if nf <= NORM_EPS:
        raise DegenerateVector("hip axis parallel to trunk; forward axis undefined")
    forward /= nf
    thigh = frame.position(f"{side[0]}_knee") - frame.position(f"{side[0]}_hip")
    magnitude = 180.0 - raw_hip
    return -magnitude if float(np.dot(thigh, forward)) < 0.0 else magnitude


def frame_angles(frame: KeypointFrame, convention: str = "flexion") -> tuple[float, float, float, float]:
    """(r_hip, l_hip, r_knee, l_knee) for one complete frame."""
    if convention not in ("raw", "flexion"):
        raise ValueError(f"unknown convention {convention!r}")
    r_hip = hip_angle(frame, "right")
    l_hip = hip_angle(frame, "left")
    if convention == "flexion":
        r_hip = to_flexion_convention(r_hip, frame, "right")
        l_hip = to_flexion_convention(l_hip, frame, "left")
    return r_hip, l_hip, knee_angle(frame, "right"), knee_angle(frame, "left")


def _check_side(side: str):
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
