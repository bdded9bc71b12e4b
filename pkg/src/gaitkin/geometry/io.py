"""Keypoint and angle file formats.

Keypoint files are UTF-8 JSON lines, one frame per line:

    {"time_s": 0.02, "joints": {"pelvis": [x, y, z], "spine": [x, y, z, conf], ...}}

Joint names outside the canonical set are ignored; a frame missing
canonical joints is kept and flagged incomplete downstream. Angle files
are CSV with header ``time_s,r_hip,l_hip,r_knee,l_knee`` in degrees,
six decimal places.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

from gaitkin.errors import SchemaError
from gaitkin.geometry.angles import (
    ANGLE_CHANNELS,
    CANONICAL_JOINTS,
    JointAngleFrame,
    Keypoint3D,
    KeypointFrame,
)

ANGLE_HEADER = "time_s,r_hip,l_hip,r_knee,l_knee"


def write_keypoint_file(path, frames: Iterable[KeypointFrame]):
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for frame in frames:
            joints = {}
            for name, kp in frame.joints.items():
                if kp.confidence != 1.0:
                    joints[name] = [kp.x, kp.y, kp.z, kp.confidence]
                else:
                    joints[name] = [kp.x, kp.y, kp.z]
            fh.write(json.dumps({"time_s": frame.time_s, "joints": joints}) + "\n")


def read_keypoint_file(path) -> list[KeypointFrame]:
    path = Path(path)
    frames: list[KeypointFrame] = []
    last_t = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(path, lineno, f"invalid JSON: {exc.msg}") from None
            if not isinstance(record, dict) or "time_s" not in record or "joints" not in record:
                raise SchemaError(path, lineno, "record must have 'time_s' and 'joints'")
            try:
                t = float(record["time_s"])
            except (TypeError, ValueError):
                raise SchemaError(path, lineno, "time_s is not a number") from None
            if last_t is not None and t <= last_t:
                raise SchemaError(path, lineno, f"time_s {t} not increasing (previous {last_t})")
            last_t = t
            joints = {}
            raw = record["joints"]
            if not isinstance(raw, dict):
                raise SchemaError(path, lineno, "'joints' must be an object")
            for name, coords in raw.items():
                if name not in CANONICAL_JOINTS:
                    continue
                if not isinstance(coords, (list, tuple)) or len(coords) not in (3, 4):
                    raise SchemaError(path, lineno, f"joint {name!r} needs [x, y, z(, conf)]")
                try:
                    xyz = [float(c) for c in coords]
                except (TypeError, ValueError):
                    raise SchemaError(path, lineno, f"joint {name!r} has non-numeric coordinates") from None
                conf = xyz[3] if len(xyz) == 4 else 1.0
                try:
                    joints[name] = Keypoint3D(xyz[0], xyz[1], xyz[2], conf)
                except ValueError as exc:
                    raise SchemaError(path, lineno, f"joint {name!r}: {exc}") from None
            frames.append(KeypointFrame(time_s=t, joints=joints))
    return frames


def write_angle_file(path, frames: Iterable[JointAngleFrame]):
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(ANGLE_HEADER + "\n")
        for f in frames:
            fh.write(
                f"{f.time_s:.6f},{f.r_hip:.6f},{f.l_hip:.6f},{f.r_knee:.6f},{f.l_knee:.6f}\n"
            )


def read_angle_file(path) -> list[JointAngleFrame]:
    path = Path(path)
    frames: list[JointAngleFrame] = []
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != ANGLE_HEADER:
            raise SchemaError(path, 1, f"expected header {ANGLE_HEADER!r}, got {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 5:
                raise SchemaError(path, lineno, f"expected 5 fields, got {len(parts)}")
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise SchemaError(path, lineno, "non-numeric field") from None
            try:
                frames.append(
                    JointAngleFrame(
                        time_s=vals[0],
                        **{name: vals[1 + k] for k, name in enumerate(ANGLE_CHANNELS)},
                    )
                )
            except ValueError as exc:
                raise SchemaError(path, lineno, str(exc)) from None
    return frames
