"""Deterministic synthetic gait: trajectories, keypoints, IMU streams."""

from gaitkin.synth.profiles import (
    TRAINING_SPEEDS,
    GaitProfile,
    SpeedProfile,
    StiffKneeSpec,
    amplitude_scale,
    cadence_for_speed,
    make_subject,
    validation_speed_profile,
)
from gaitkin.synth.trajectories import (
    joint_trajectories,
    joint_trajectories_profiled,
    soft_clamp,
)
from gaitkin.synth.keypoints import simulate_keypoints
from gaitkin.synth.imu import (
    IMU_CHANNELS,
    IMU_HEADER,
    ImuSample,
    imu_matrix,
    read_imu_file,
    simulate_imu,
    write_imu_file,
)
from gaitkin.synth.protocol import (
    CAMERA_RATE_HZ,
    IMU_RATE_HZ,
    Recording,
    SynthNoise,
    hpe_labels,
    training_protocol,
    validation_recording,
)

__all__ = [
    "TRAINING_SPEEDS",
    "GaitProfile",
    "SpeedProfile",
    "StiffKneeSpec",
    "SynthNoise",
    "Recording",
    "ImuSample",
    "IMU_CHANNELS",
    "IMU_HEADER",
    "IMU_RATE_HZ",
    "CAMERA_RATE_HZ",
    "amplitude_scale",
    "cadence_for_speed",
    "make_subject",
    "validation_speed_profile",
    "joint_trajectories",
    "joint_trajectories_profiled",
    "soft_clamp",
    "simulate_keypoints",
    "simulate_imu",
    "imu_matrix",
    "read_imu_file",
    "write_imu_file",
    "hpe_labels",
    "training_protocol",
    "validation_recording",
]
