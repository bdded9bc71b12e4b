"""Ground-truth joint-angle trajectories from a subject profile.

Hip angles use the signed flexion convention; knee angles are flexion
with 0 = straight leg. The left side runs half a cycle behind the right.
A stiff-knee spec soft-clamps one knee with a softplus saturation so the
trajectory stays smooth near the ceiling, like a compliant brace.
"""

from __future__ import annotations

import numpy as np

from gaitkin.geometry.angles import JointAngleFrame
from gaitkin.synth.profiles import (
    GaitProfile,
    Harmonics,
    SpeedProfile,
    StiffKneeSpec,
    amplitude_scale,
    cadence_for_speed,
)


def evaluate_harmonics(series: Harmonics, phase_cycles: np.ndarray) -> np.ndarray:
    out = np.zeros_like(phase_cycles, dtype=np.float64)
    for k, (amp, ph) in enumerate(series):
        out += amp * np.cos(2.0 * np.pi * k * phase_cycles + ph)
    return out


def soft_clamp(values: np.ndarray, ceiling: float, softness: float) -> np.ndarray:
    """Smooth minimum against a ceiling; exact min() when softness is 0."""
    if softness == 0.0:
        return np.minimum(values, ceiling)
    x = (ceiling - values) / softness
    # log1p(exp(x)) overflows for large x; there softplus(x) == x
    sp = np.where(x > 30.0, x, np.log1p(np.exp(np.minimum(x, 30.0))))
    return ceiling - softness * sp


def _angle_matrix(profile: GaitProfile, phase: np.ndarray, scale: np.ndarray,
                  sk: StiffKneeSpec | None) -> np.ndarray:
    """Columns: r_hip, l_hip, r_knee, l_knee (degrees)."""
    phase_l = phase + profile.phase_offset
    cols = np.column_stack(
        [
            evaluate_harmonics(profile.r_hip, phase),
            evaluate_harmonics(profile.l_hip, phase_l),
            evaluate_harmonics(profile.r_knee, phase),
            evaluate_harmonics(profile.l_knee, phase_l),
        ]
    )
    cols *= scale[:, None]
    if sk is not None:
        col = 2 if sk.side == "right" else 3
        cols[:, col] = soft_clamp(cols[:, col], sk.max_flexion_deg, sk.softness_deg)
    return cols


def joint_trajectories(
    profile: GaitProfile,
    sk: StiffKneeSpec | None = None,
    duration_s: float = 60.0,
    rate_hz: float = 50.0,
) -> list[JointAngleFrame]:
    """Constant-speed trajectory: n = round(duration * rate) frames."""
    if duration_s <= 0:
        raise ValueError("duration must be > 0")
    n = int(round(duration_s * rate_hz))
    t = np.arange(n) / rate_hz
    phase = profile.cadence_hz * t
    scale = np.full(n, amplitude_scale(profile.speed_mps))
    return _frames(t, _angle_matrix(profile, phase, scale, sk))


def joint_trajectories_profiled(
    profile: GaitProfile,
    speed_profile: SpeedProfile,
    sk: StiffKneeSpec | None = None,
    rate_hz: float = 50.0,
) -> list[JointAngleFrame]:
    """Trajectory under time-varying speed.

    Gait phase integrates the instantaneous cadence; amplitudes follow
    the instantaneous speed scale.
    """
    n = int(round(speed_profile.duration_s * rate_hz))
    t = speed_profile.knots[0][0] + np.arange(n) / rate_hz
    speed = speed_profile.speed_at(t)
    cadence = np.clip(0.6 + 0.55 * speed, 0.6, 1.6)
    phase = np.cumsum(cadence) / rate_hz  # left Riemann sum of cadence dt
    phase -= phase[0]
    scale = np.array([amplitude_scale(s) for s in speed])
    return _frames(t, _angle_matrix(profile, phase, scale, sk))


def _frames(t: np.ndarray, cols: np.ndarray) -> list[JointAngleFrame]:
    return [
        JointAngleFrame(
            time_s=float(t[i]),
            r_hip=float(cols[i, 0]),
            l_hip=float(cols[i, 1]),
            r_knee=float(cols[i, 2]),
            l_knee=float(cols[i, 3]),
        )
        for i in range(len(t))
    ]
