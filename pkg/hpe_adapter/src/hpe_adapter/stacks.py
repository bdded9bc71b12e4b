"""Detection / 2D-pose / lifting stacks.

The adapter's contract is the output file format, not a specific
network, so stacks are pluggable. The built-in "marker" stack is a
classical color-blob detector for videos with color-coded joints (the
renderer in this package produces such videos); it needs no model
weights and runs anywhere. Neural stacks (detector "yolov8", 2D pose
"vitpose-b", lifter "videopose3d") are accepted by name but only load
when their weights are present locally (HPE_ADAPTER_WEIGHTS dir);
otherwise they raise ModelLoadError.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from hpe_adapter.config import ModelLoadError

# joint -> BGR marker color used by the renderer and the marker stack;
# chosen pairwise-distant so nearest-color classification is unambiguous
MARKER_COLORS = {
    "pelvis": (255, 0, 0),
    "spine": (0, 255, 0),
    "l_hip": (0, 0, 255),
    "r_hip": (255, 255, 0),
    "l_knee": (255, 0, 255),
    "r_knee": (0, 255, 255),
    "l_ankle": (128, 0, 255),
    "r_ankle": (0, 128, 255),
}

_MIN_BLOB_PIXELS = 6
_COLOR_TOLERANCE = 60.0  # max distance to a marker color, per channel RMS


def detect_person_bbox(frame: np.ndarray):
    """Bounding box of non-background pixels (background is near-black)."""
    mask = frame.sum(axis=2) > 60
    ys, xs = np.nonzero(mask)
    if xs.size < _MIN_BLOB_PIXELS:
        return None
    return int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())


def marker_pose2d(frame: np.ndarray, bbox) -> dict[str, tuple[float, float, float]]:
    """Per-joint (u, v, confidence) from color-blob centroids."""
    out = {}
    if bbox is None:
        return out
    x0, y0, x1, y1 = bbox
    crop = frame[y0 : y1 + 1, x0 : x1 + 1].astype(np.float64)
    lit = crop.sum(axis=2) > 60
    if not lit.any():
        return out
    ys, xs = np.nonzero(lit)
    pixels = crop[ys, xs]  # (n, 3) BGR
    names = list(MARKER_COLORS)
    palette = np.array([MARKER_COLORS[n] for n in names], dtype=np.float64)
    d2 = ((pixels[:, None, :] - palette[None, :, :]) ** 2).mean(axis=2)
    nearest = d2.argmin(axis=1)
    ok = d2[np.arange(len(pixels)), nearest] < _COLOR_TOLERANCE**2
    for k, name in enumerate(names):
        sel = ok & (nearest == k)
        count = int(sel.sum())
        if count < _MIN_BLOB_PIXELS:
            continue
        u = float(xs[sel].mean()) + x0
        v = float(ys[sel].mean()) + y0
        confidence = min(1.0, count / 40.0)
        out[name] = (u, v, confidence)
    return out


def planar_lift(joints2d: dict[str, tuple[float, float, float]], image_h: int):
    """Sagittal-plane lift: image (u, v) -> (x, y) with side-coded depth.

    Output units are arbitrary (pixels); the caller rescales so the mean
    hip-to-knee distance matches a nominal thigh length. Left-side
    joints sit at negative mediolateral offset, right-side at positive,
    matching a subject walking along +x with +y up.
    """
    out = {}
    for name, (u, v, conf) in joints2d.items():
        z = 0.0
        if name.startswith("l_"):
            z = -22.0
        elif name.startswith("r_"):
            z = 22.0
        out[name] = (u, float(image_h - v), z, conf)
    return out


def _weights_dir() -> Path:
    return Path(os.environ.get("HPE_ADAPTER_WEIGHTS", "~/.cache/hpe-adapter")).expanduser()


def require_model(kind: str, name: str):
    """Resolve a neural model by name; marker/planar stacks need none."""
    if name in ("marker", "planar"):
        return name
    weights = _weights_dir() / f"{name}.pt"
    if not weights.exists():
        raise ModelLoadError(
            f"{kind} model {name!r} not found at {weights}; place weights there "
            f"or use the built-in marker stack"
        )
    return weights
