"""Video to canonical keypoint files."""

from __future__ import annotations

import json
from pathlib import Path

import cv2
import numpy as np

from hpe_adapter.config import (
    CANONICAL_JOINTS,
    THIGH_LENGTH_M,
    AdapterConfig,
    UnmappedJoint,
    VideoDecodeError,
)
from hpe_adapter.stacks import detect_person_bbox, marker_pose2d, planar_lift, require_model


def extract_keypoints(config: AdapterConfig) -> int:
    """Run the stack over every frame; returns the record count.

    One output record per video frame at time_s = index / fps. Frames
    where detection fails are emitted with whatever joints were found
    (possibly none); downstream gap handling owns the policy.
    """
    require_model("detector", config.detector)
    require_model("2d-pose", config.pose2d)
    require_model("lifter", config.lifter)

    cap = cv2.VideoCapture(str(config.video))
    if not cap.isOpened():
        raise VideoDecodeError(f"cannot open video {config.video!r}")
    fps = config.fps or cap.get(cv2.CAP_PROP_FPS)
    if not fps or fps <= 0:
        raise VideoDecodeError(f"{config.video!r} reports no frame rate; pass --fps")

    # invert the mapping: canonical name -> model joint name
    wanted = {}
    for model_name, canonical in config.mapping.items():
        wanted.setdefault(canonical, model_name)
    missing = [j for j in CANONICAL_JOINTS if j not in wanted]
    if missing:
        raise UnmappedJoint(f"mapping does not cover: {', '.join(missing)}")

    frames = []
    index = 0
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        bbox = detect_person_bbox(frame)
        joints2d = marker_pose2d(frame, bbox)
        lifted = planar_lift(joints2d, frame.shape[0])
        joints = {}
        for canonical in CANONICAL_JOINTS:
            model_name = wanted[canonical]
            # the marker stack already emits canonical names; a neural
            # stack would emit its own skeleton's names
            hit = lifted.get(canonical) or lifted.get(model_name)
            if hit is not None:
                joints[canonical] = hit
        frames.append((index / fps, joints))
        index += 1
    cap.release()
    if not frames:
        raise VideoDecodeError(f"{config.video!r} contains no decodable frames")

    scale = _scale_to_metric(frames)
    out = Path(config.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        for time_s, joints in frames:
            record = {
                "time_s": round(time_s, 9),
                "joints": {
                    name: [x * scale, y * scale, z * scale, round(conf, 4)]
                    for name, (x, y, z, conf) in joints.items()
                },
            }
            fh.write(json.dumps(record) + "\n")
    return len(frames)


def _scale_to_metric(frames) -> float:
    """Pixels-to-meters factor: mean hip-to-knee distance -> 0.45 m."""
    lengths = []
    for _, joints in frames:
        for side in "lr":
            hip = joints.get(f"{side}_hip")
            knee = joints.get(f"{side}_knee")
            if hip is None or knee is None:
                continue
            d = np.hypot(hip[0] - knee[0], hip[1] - knee[1])
            if d > 0:
                lengths.append(d)
    if not lengths:
        return 1.0
    return THIGH_LENGTH_M / float(np.mean(lengths))
