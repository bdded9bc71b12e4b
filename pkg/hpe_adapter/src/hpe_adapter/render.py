"""Render a marker video from a canonical keypoint file.

Test and demo helper: draws each joint as a solid color-coded disk on a
black background (orthographic side view, x right, y up), producing
exactly the kind of footage the built-in marker stack can track. The
input is the primary toolkit's keypoint file format, so any of its
synthetic recordings can be turned into a walking clip.
"""

from __future__ import annotations

import json
from pathlib import Path

import cv2
import numpy as np

from hpe_adapter.stacks import MARKER_COLORS


def render_marker_video(
    keypoint_file,
    out_video,
    fps: float = 30.0,
    size: tuple[int, int] = (480, 640),
    yaw_shear: float = 0.5,
    max_frames: int | None = None,
) -> int:
    """Returns the number of frames written (AVI container, MJPG).

    ``yaw_shear`` mixes the mediolateral coordinate into the horizontal
    image axis (u = x + yaw_shear * z), like a camera turned slightly
    off the sagittal plane: a straight-on side view would stack the
    pelvis and both hip markers on the same pixel. Same-side joints
    share one z, so their difference vectors (and thus joint angles)
    are unchanged by the shear.
    """
    records = []
    with Path(keypoint_file).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    if max_frames is not None:
        records = records[:max_frames]
    if not records:
        raise ValueError(f"{keypoint_file} has no records")

    pts = [
        (name, xyz)
        for rec in records
        for name, xyz in rec["joints"].items()
        if name in MARKER_COLORS
    ]
    xs = np.array([p[1][0] + yaw_shear * p[1][2] for p in pts])
    ys = np.array([p[1][1] for p in pts])
    w, h = size
    margin = 40
    span = max(xs.max() - xs.min(), ys.max() - ys.min(), 1e-6)
    scale = min(w - 2 * margin, h - 2 * margin) / span
    x0, y0 = xs.min(), ys.min()

    writer = cv2.VideoWriter(
        str(out_video), cv2.VideoWriter_fourcc(*"MJPG"), fps, (w, h)
    )
    if not writer.isOpened():
        raise RuntimeError(f"cannot open video writer for {out_video}")
    for rec in records:
        frame = np.zeros((h, w, 3), dtype=np.uint8)
        for name, xyz in rec["joints"].items():
            color = MARKER_COLORS.get(name)
            if color is None:
                continue
            u = int(margin + (xyz[0] + yaw_shear * xyz[2] - x0) * scale)
            v = int(h - margin - (xyz[1] - y0) * scale)
            cv2.circle(frame, (u, v), 4, color, -1)
        writer.write(frame)
    writer.release()
    return len(records)
