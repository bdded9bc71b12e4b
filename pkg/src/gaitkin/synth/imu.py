"""Simulated 18-channel IMU streams from joint-angle trajectories.

Three sensors: pelvis, left thigh, right thigh; each reports 3-axis
acceleration (m/s2) then 3-axis angular rate (rad/s), in that order.
The rigid-segment model is sagittal: a segment's world tilt is the
pelvis tilt (zero, trunk vertical) plus its hip flexion. Each sensor's
local y axis is the mediolateral rotation axis, so gyro y carries the
central-difference angle rate and the other gyro channels are
off-plane (noise only). Acceleration is gravity plus the segment-origin
linear acceleration (second difference of the hip-point position),
both expressed in the sensor frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from gaitkin.errors import RateMismatch, SchemaError
from gaitkin.geometry.angles import JointAngleFrame
from gaitkin.synth.profiles import GaitProfile

GRAVITY_MPS2 = 9.81

IMU_SITES = ("pelvis", "l_thigh", "r_thigh")
IMU_AXES = ("ax", "ay", "az", "gx", "gy", "gz")
IMU_CHANNELS = tuple(f"{site}_{axis}" for site in IMU_SITES for axis in IMU_AXES)
IMU_HEADER = "time_s," + ",".join(IMU_CHANNELS)


@dataclass(frozen=True)
class ImuSample:
    """One 50 Hz tick of all three sensors, channel order as IMU_CHANNELS."""

    time_s: float
    channels: tuple[float, ...]

    def __post_init__(self):
        if len(self.channels) != 18:
            raise ValueError(f"expected 18 channels, got {len(self.channels)}")
        if not all(math.isfinite(c) for c in self.channels):
            raise ValueError("IMU channels must be finite")


def simulate_imu(
    angles: Sequence[JointAngleFrame],
    profile: GaitProfile,
    accel_noise_std: float = 0.0,
    gyro_noise_std: float = 0.0,
    seed: int = 0,
    rate_hz: float = 50.0,
) -> list[ImuSample]:
    if accel_noise_std < 0 or gyro_noise_std < 0:
        raise ValueError("noise stds must be >= 0")
    t = np.array([f.time_s for f in angles])
    if len(t) < 3:
        raise ValueError("need at least 3 angle frames")
    dt = 1.0 / rate_hz
    if not np.allclose(np.diff(t), dt, atol=1e-9):
        raise RateMismatch(f"angle sequence is not sampled at {rate_hz} Hz")

    n = len(t)
    # segment tilts (rad): pelvis is upright; thighs follow hip flexion
    tilt = np.zeros((n, 3))
    tilt[:, 1] = np.radians([f.l_hip for f in angles])
    tilt[:, 2] = np.radians([f.r_hip for f in angles])

    # segment origins: pelvis point and the two hip points (fixed offsets
    # of the pelvis in this planar model, so their acceleration is zero,
    # but the second difference is computed anyway for generality)
    pelvis_y = profile.thigh_m + profile.shank_m
    origin = np.zeros((n, 3, 3))
    origin[:, :, 1] = pelvis_y
    origin[:, 1, 2] = -profile.hip_halfwidth_m
    origin[:, 2, 2] = profile.hip_halfwidth_m

    omega = _central_difference(tilt, dt)
    accel_lin = _second_difference(origin, dt)

    gravity = np.array([0.0, -GRAVITY_MPS2, 0.0])
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n):
        channels = []
        for s in range(3):
            th = tilt[i, s]
            x_axis = np.array([math.cos(th), math.sin(th), 0.0])
            y_axis = np.array([0.0, 0.0, 1.0])
            z_axis = np.array([math.sin(th), -math.cos(th), 0.0])
            total = gravity + accel_lin[i, s]
            acc = np.array([total @ x_axis, total @ y_axis, total @ z_axis])
            gyr = np.array([0.0, omega[i, s], 0.0])
            if accel_noise_std > 0:
                acc = acc + rng.normal(0.0, accel_noise_std, size=3)
            if gyro_noise_std > 0:
                gyr = gyr + rng.normal(0.0, gyro_noise_std, size=3)
            channels.extend([*acc, *gyr])
        samples.append(ImuSample(time_s=float(t[i]), channels=tuple(map(float, channels))))
    return samples


def _central_difference(series: np.ndarray, dt: float) -> np.ndarray:
    out = np.empty_like(series)
    out[1:-1] = (series[2:] - series[:-2]) / (2.0 * dt)
    out[0] = (series[1] - series[0]) / dt
    out[-1] = (series[-1] - series[-2]) / dt
    return out


def _second_difference(series: np.ndarray, dt: float) -> np.ndarray:
    out = np.zeros_like(series)
    out[1:-1] = (series[2:] - 2.0 * series[1:-1] + series[:-2]) / (dt * dt)
    return out


def imu_matrix(samples: Sequence[ImuSample]) -> tuple[np.ndarray, np.ndarray]:
    """(times, 18 x n channel matrix) view of a sample sequence."""
    t = np.array([s.time_s for s in samples])
    x = np.array([s.channels for s in samples]).T
    return t, x


def write_imu_file(path, samples: Iterable[ImuSample]):
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(IMU_HEADER + "\n")
        for s in samples:
            fh.write(f"{s.time_s:.6f}," + ",".join(f"{c:.9g}" for c in s.channels) + "\n")


def read_imu_file(path) -> list[ImuSample]:
    path = Path(path)
    samples = []
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != IMU_HEADER:
            raise SchemaError(path, 1, "unexpected IMU file header")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 19:
                raise SchemaError(path, lineno, f"expected 19 fields, got {len(parts)}")
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise SchemaError(path, lineno, "non-numeric field") from None
            try:
                samples.append(ImuSample(time_s=vals[0], channels=tuple(vals[1:])))
            except ValueError as exc:
                raise SchemaError(path, lineno, str(exc)) from None
    return samples
