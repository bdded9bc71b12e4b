"""Planar skeleton keypoints posed from joint angles.

The sagittal plane is x (forward) / y (up); z is mediolateral with the
left hip at -hip_halfwidth and the right at +hip_halfwidth, which makes
(l_hip - r_hip) x trunk-up point forward. The pelvis sits at a fixed
height, the trunk is vertical, and thigh/shank directions follow the
flexion angles, so extracting angles from noiseless keypoints closes the
loop exactly. Gaussian position noise models pose-estimator jitter, with
extra noise on left-side joints to mimic single-camera occlusion.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from gaitkin.geometry.angles import JointAngleFrame, Keypoint3D, KeypointFrame
from gaitkin.synth.profiles import GaitProfile

LEFT_JOINTS = ("l_hip", "l_knee", "l_ankle")


def simulate_keypoints(
    angles: Sequence[JointAngleFrame],
    profile: GaitProfile,
    jitter_std_m: float = 0.0,
    left_occlusion_std_m: float = 0.0,
    seed: int = 0,
) -> list[KeypointFrame]:
    if jitter_std_m < 0 or left_occlusion_std_m < 0:
        raise ValueError("noise stds must be >= 0")
    rng = np.random.default_rng(seed)
    pelvis_y = profile.thigh_m + profile.shank_m
    pelvis = np.array([0.0, pelvis_y, 0.0])
    spine = pelvis + np.array([0.0, profile.trunk_m, 0.0])
    frames: list[KeypointFrame] = []
    for frame in angles:
        joints = {"pelvis": pelvis.copy(), "spine": spine.copy()}
        for side, hip_deg, knee_deg in (
            ("l", frame.l_hip, frame.l_knee),
            ("r", frame.r_hip, frame.r_knee),
        ):
            z = -profile.hip_halfwidth_m if side == "l" else profile.hip_halfwidth_m
            hip = pelvis + np.array([0.0, 0.0, z])
            th = math.radians(hip_deg)
            thigh_dir = np.array([math.sin(th), -math.cos(th), 0.0])
            knee = hip + profile.thigh_m * thigh_dir
            sh = th - math.radians(knee_deg)  # shank folds backward from the thigh
            shank_dir = np.array([math.sin(sh), -math.cos(sh), 0.0])
            ankle = knee + profile.shank_m * shank_dir
            joints[f"{side}_hip"] = hip
            joints[f"{side}_knee"] = knee
            joints[f"{side}_ankle"] = ankle
        if jitter_std_m > 0 or left_occlusion_std_m > 0:
            for name in joints:
                noise = rng.normal(0.0, jitter_std_m, size=3) if jitter_std_m > 0 else 0.0
                joints[name] = joints[name] + noise
                if left_occlusion_std_m > 0 and name in LEFT_JOINTS:
                    joints[name] = joints[name] + rng.normal(0.0, left_occlusion_std_m, size=3)
        frames.append(
            KeypointFrame(
                time_s=frame.time_s,
                joints={k: Keypoint3D(*map(float, v)) for k, v in joints.items()},
            )
        )
    return frames
