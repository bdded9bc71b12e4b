"""RMSE reports and improvement percentages."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gaitkin.errors import LengthMismatch, ZeroBaseline
from gaitkin.geometry.angles import ANGLE_CHANNELS, JointAngleFrame

JOINTS = ANGLE_CHANNELS  # ("r_hip", "l_hip", "r_knee", "l_knee")


@dataclass(frozen=True)
class EvalReport:
    """Per-joint RMSE in degrees plus hip/knee/overall means."""

    per_joint: dict[str, float]
    hip_mean: float
    knee_mean: float
    overall_mean: float
    count: int
    per_speed: dict[str, "EvalReport"] | None = None

    def as_dict(self) -> dict:
        out = {
            "per_joint": dict(self.per_joint),
            "hip_mean": self.hip_mean,
            "knee_mean": self.knee_mean,
            "overall_mean": self.overall_mean,
            "count": self.count,
        }
        if self.per_speed is not None:
            out["per_speed"] = {k: v.as_dict() for k, v in self.per_speed.items()}
        return out


def _as_matrix(frames) -> np.ndarray:
    if isinstance(frames, np.ndarray):
        mat = np.asarray(frames, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[1] != 4:
            raise LengthMismatch(f"expected (n, 4) angles, got {mat.shape}")
        return mat
    if len(frames) and isinstance(frames[0], JointAngleFrame):
        return np.array([f.as_array() for f in frames])
    return _as_matrix(np.asarray(frames, dtype=np.float64))


def _report_from_errors(err: np.ndarray, per_speed=None) -> EvalReport:
    rmse = np.sqrt(np.mean(err**2, axis=0))
    per_joint = {name: float(rmse[k]) for k, name in enumerate(JOINTS)}
    return EvalReport(
        per_joint=per_joint,
        hip_mean=float((rmse[0] + rmse[1]) / 2.0),
        knee_mean=float((rmse[2] + rmse[3]) / 2.0),
        overall_mean=float(rmse.mean()),
        count=err.shape[0],
        per_speed=per_speed,
    )


def rmse_report(preds, truth, speed_labels: Sequence[str] | None = None) -> EvalReport:
    """Per-joint RMSE of predictions against truth.

    ``speed_labels`` (one per sample, e.g. "1.1" or "transient") adds a
    per-speed-condition breakdown.
    """
    p = _as_matrix(preds)
    t = _as_matrix(truth)
    if p.shape[0] != t.shape[0]:
        raise LengthMismatch(f"{p.shape[0]} predictions vs {t.shape[0]} truth samples")
    if p.shape[0] == 0:
        raise LengthMismatch("need at least one sample")
    err = p - t
    per_speed = None
    if speed_labels is not None:
        if len(speed_labels) != p.shape[0]:
            raise LengthMismatch("speed_labels length mismatch")
        labels = np.asarray(speed_labels)
        per_speed = {}
        for label in sorted(set(labels.tolist())):
            per_speed[label] = _report_from_errors(err[labels == label])
    return _report_from_errors(err, per_speed)


def improvement_pct(baseline_rmse: float, new_rmse: float) -> float:
    """Percent reduction of ``new_rmse`` relative to ``baseline_rmse``."""
    if baseline_rmse <= 0:
        raise ZeroBaseline(f"baseline must be > 0, got {baseline_rmse}")
    return 100.0 * (baseline_rmse - new_rmse) / baseline_rmse


def format_report_text(reports: dict[str, EvalReport]) -> str:
    """Aligned-column text table, one row per named report."""
    headers = ["trial", *JOINTS, "hip", "knee", "overall", "n"]
    rows = []
    for name, rep in reports.items():
        rows.append(
            [
                name,
                *(f"{rep.per_joint[j]:.3f}" for j in JOINTS),
                f"{rep.hip_mean:.3f}",
                f"{rep.knee_mean:.3f}",
                f"{rep.overall_mean:.3f}",
                str(rep.count),
            ]
        )
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines)


def write_report_jsonl(path, reports: dict[str, EvalReport]):
    with open(path, "w", encoding="utf-8") as fh:
        for name, rep in reports.items():
            fh.write(json.dumps({"trial": name, **rep.as_dict()}) + "\n")
