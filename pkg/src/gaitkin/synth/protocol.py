"""Recording protocols for the synthetic populations.

Training protocol: four constant-speed recordings (0.4, 0.7, 1.0,
1.3 m/s), one minute each at 50 Hz, per subject. Validation: a single
185 s treadmill profile sweeping 1.1 / 0.5 / 1.2 / 0.6 m/s with
0.5 m/s2 ramps. Recordings carry ground-truth angles and simulated IMU
data; keypoints are regenerated on demand at the camera rate (150 Hz by
default) so long sequences never sit in memory unless needed. Label
streams extracted from those keypoints stand in for a pose-estimation
pipeline: smoothed at camera rate, then sampled onto the 50 Hz grid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from gaitkin.geometry.angles import JointAngleFrame, KeypointFrame
from gaitkin.geometry.labels import extract_angle_labels
from gaitkin.geometry.savgol import SavGolSpec
from gaitkin.synth.imu import ImuSample, simulate_imu
from gaitkin.synth.keypoints import simulate_keypoints
from gaitkin.synth.profiles import (
    TRAINING_SPEEDS,
    GaitProfile,
    SpeedProfile,
    StiffKneeSpec,
    validation_speed_profile,
)
from gaitkin.synth.trajectories import joint_trajectories, joint_trajectories_profiled

IMU_RATE_HZ = 50.0
CAMERA_RATE_HZ = 150.0
TRIAL_DURATION_S = 60.0


@dataclass(frozen=True)
class SynthNoise:
    """Sensor and pose-jitter noise levels for the synthetic pipeline."""

    accel_std: float = 0.25       # m/s2
    gyro_std: float = 0.025       # rad/s
    kp_jitter_std_m: float = 0.006
    kp_left_occlusion_std_m: float = 0.005


@dataclass(frozen=True)
class Recording:
    """One trial: truth angles + IMU at 50 Hz, keypoints on demand."""

    id: str
    speed_mps: float | None       # None when driven by a speed profile
    sk: bool
    subject: GaitProfile
    sk_spec: StiffKneeSpec | None
    angles_truth: tuple[JointAngleFrame, ...]
    imu: tuple[ImuSample, ...]
    noise: SynthNoise
    seed: int
    speed_profile: SpeedProfile | None = None
    camera_rate_hz: float = CAMERA_RATE_HZ

    def keypoints(self) -> list[KeypointFrame]:
        """Noisy camera-rate keypoints, deterministic under the seed."""
        angles = self._angles_at(self.camera_rate_hz)
        return simulate_keypoints(
            angles,
            self.profile_for_pose(),
            jitter_std_m=self.noise.kp_jitter_std_m,
            left_occlusion_std_m=self.noise.kp_left_occlusion_std_m,
            seed=self.seed + 1,
        )

    def profile_for_pose(self) -> GaitProfile:
        if self.speed_mps is not None:
            return replace(self.subject, speed_mps=self.speed_mps)
        return self.subject

    def _angles_at(self, rate_hz: float) -> list[JointAngleFrame]:
        if self.speed_profile is not None:
            return joint_trajectories_profiled(
                self.subject, self.speed_profile, self.sk_spec, rate_hz=rate_hz
            )
        profile = replace(self.subject, speed_mps=self.speed_mps)
        duration = len(self.angles_truth) / IMU_RATE_HZ
        return joint_trajectories(profile, self.sk_spec, duration, rate_hz=rate_hz)


def _build_recording(
    rec_id: str,
    subject: GaitProfile,
    sk_spec: StiffKneeSpec | None,
    noise: SynthNoise,
    seed: int,
    speed_mps: float | None = None,
    speed_profile: SpeedProfile | None = None,
) -> Recording:
    if speed_profile is not None:
        angles = joint_trajectories_profiled(subject, speed_profile, sk_spec, rate_hz=IMU_RATE_HZ)
        profile = subject
    else:
        profile = replace(subject, speed_mps=speed_mps)
        angles = joint_trajectories(profile, sk_spec, TRIAL_DURATION_S, rate_hz=IMU_RATE_HZ)
    imu = simulate_imu(
        angles,
        profile,
        accel_noise_std=noise.accel_std,
        gyro_noise_std=noise.gyro_std,
        seed=seed,
        rate_hz=IMU_RATE_HZ,
    )
    return Recording(
        id=rec_id,
        speed_mps=speed_mps,
        sk=sk_spec is not None,
        subject=subject,
        sk_spec=sk_spec,
        angles_truth=tuple(angles),
        imu=tuple(imu),
        noise=noise,
        seed=seed,
        speed_profile=speed_profile,
    )


def training_protocol(
    subject: GaitProfile,
    sk: StiffKneeSpec | None = None,
    noise: SynthNoise = SynthNoise(),
    seed: int = 0,
    id_prefix: str = "rec",
) -> list[Recording]:
    """Four constant-speed trials, 60 s each, tagged with speed and population."""
    recordings = []
    for i, speed in enumerate(TRAINING_SPEEDS):
        recordings.append(
            _build_recording(
                rec_id=f"{id_prefix}_v{speed:g}",
                subject=subject,
                sk_spec=sk,
                noise=noise,
                seed=seed * 100 + i,
                speed_mps=speed,
            )
        )
    return recordings


def validation_recording(
    subject: GaitProfile,
    sk: StiffKneeSpec | None = None,
    noise: SynthNoise = SynthNoise(),
    seed: int = 0,
    rec_id: str = "validation",
) -> Recording:
    """The 185 s multi-speed treadmill trial."""
    return _build_recording(
        rec_id=rec_id,
        subject=subject,
        sk_spec=sk,
        noise=noise,
        seed=seed * 100 + 99,
        speed_profile=validation_speed_profile(),
    )


def hpe_labels(recording: Recording, spec: SavGolSpec = SavGolSpec()) -> list[JointAngleFrame]:
    """Vision-pipeline label stream: extract at camera rate, sample at 50 Hz.

    The camera rate is an integer multiple of 50 Hz, so the subsample
    lands exactly on the IMU timestamps.
    """
    step = int(round(recording.camera_rate_hz / IMU_RATE_HZ))
    labels = extract_angle_labels(recording.keypoints(), spec, convention="flexion")
    picked = labels[::step]
    n = len(recording.imu)
    if len(picked) < n:
        raise ValueError("camera stream shorter than the IMU stream")
    return picked[:n]
