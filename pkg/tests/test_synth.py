"""Synthetic gait generators: trajectories, keypoints, IMU, protocol."""

import numpy as np
import pytest

from gaitkin.errors import RateMismatch
from gaitkin.geometry.angles import JointAngleFrame
from gaitkin.geometry import SavGolSpec, extract_angle_labels
from gaitkin.geometry.angles import frame_angles
from gaitkin.synth import (
    GaitProfile,
    StiffKneeSpec,
    joint_trajectories,
    joint_trajectories_profiled,
    make_subject,
    simulate_imu,
    simulate_keypoints,
    soft_clamp,
    training_protocol,
    validation_recording,
    validation_speed_profile,
)
from gaitkin.synth.protocol import SynthNoise, hpe_labels


def angles_matrix(frames):
    return np.array([[f.r_hip, f.l_hip, f.r_knee, f.l_knee] for f in frames])


class TestTrajectories:
    def test_zero_speed_standing(self):
        frames = joint_trajectories(make_subject(0, 0.0), duration_s=2.0)
        mat = angles_matrix(frames)
        np.testing.assert_allclose(mat, 0.0, atol=1e-12)

    def test_periodicity_and_knee_peak(self):
        profile = make_subject(0, 1.0)
        frames = joint_trajectories(profile, duration_s=20.0, rate_hz=50.0)
        mat = angles_matrix(frames)
        assert 40.0 <= mat[:, 2].max() <= 80.0
        # period = 1 / cadence: sample the function one period apart
        period = 1.0 / profile.cadence_hz
        t = np.array([f.time_s for f in frames])
        for idx in (100, 400, 700):
            shifted = np.argmin(np.abs(t - (t[idx] + period)))
            assert abs(t[shifted] - t[idx] - period) < 0.02
            assert mat[shifted, 0] == pytest.approx(mat[idx, 0], abs=0.5)

    def test_sk_clamp_right_only(self):
        profile = make_subject(0, 1.0)
        sk = StiffKneeSpec(max_flexion_deg=20.0)
        free = angles_matrix(joint_trajectories(profile, None, 10.0))
        clamped = angles_matrix(joint_trajectories(profile, sk, 10.0))
        assert clamped[:, 2].max() <= 25.0
        np.testing.assert_allclose(clamped[:, 3], free[:, 3], atol=1e-9)
        np.testing.assert_allclose(clamped[:, :2], free[:, :2], atol=1e-9)

    def test_sk_monotone_in_ceiling(self):
        profile = make_subject(0, 1.0)
        roms = []
        for ceiling in (40.0, 30.0, 20.0, 10.0):
            mat = angles_matrix(
                joint_trajectories(profile, StiffKneeSpec(max_flexion_deg=ceiling), 10.0)
            )
            roms.append(mat[:, 2].max() - mat[:, 2].min())
        assert all(b <= a + 1e-9 for a, b in zip(roms, roms[1:]))

    def test_left_right_half_cycle_symmetry(self):
        # speed chosen so half a cycle is an integer number of samples
        speed = (1.25 - 0.6) / 0.55
        profile = GaitProfile(speed_mps=speed)
        assert profile.cadence_hz == pytest.approx(1.25)
        frames = joint_trajectories(profile, duration_s=20.0, rate_hz=50.0)
        mat = angles_matrix(frames)
        half = 20  # samples in half a cycle at 1.25 Hz, 50 Hz
        np.testing.assert_allclose(mat[half:-half, 1], mat[2 * half :, 0], atol=1e-9)
        np.testing.assert_allclose(mat[half:-half, 3], mat[2 * half :, 2], atol=1e-9)

    def test_determinism(self):
        a = angles_matrix(joint_trajectories(make_subject(1, 0.7), duration_s=5.0))
        b = angles_matrix(joint_trajectories(make_subject(1, 0.7), duration_s=5.0))
        assert np.array_equal(a, b)

    def test_soft_clamp_limits(self):
        v = np.linspace(-30, 80, 500)
        out = soft_clamp(v, 20.0, 5.0)
        assert out.max() <= 25.0  # ceiling + softness
        np.testing.assert_allclose(out[v < -10], v[v < -10], atol=0.02)
        hard = soft_clamp(v, 20.0, 0.0)
        np.testing.assert_allclose(hard, np.minimum(v, 20.0))


class TestKeypoints:
    def test_round_trip_recovers_angles(self):
        profile = make_subject(0, 1.0)
        angles = joint_trajectories(profile, None, duration_s=8.0, rate_hz=150.0)
        frames = simulate_keypoints(angles, profile, seed=0)
        labels = extract_angle_labels(frames, SavGolSpec(50, 4), convention="flexion")
        err = angles_matrix(labels) - angles_matrix(angles)
        assert np.sqrt((err**2).mean()) < 0.5

    def test_standing_collinear(self):
        profile = make_subject(0, 0.0)
        angles = joint_trajectories(profile, None, duration_s=0.1, rate_hz=50.0)
        frame = simulate_keypoints(angles, profile, seed=0)[0]
        hip = frame.joints["r_hip"].as_array()
        knee = frame.joints["r_knee"].as_array()
        ankle = frame.joints["r_ankle"].as_array()
        cross = np.cross(knee - hip, ankle - knee)
        np.testing.assert_allclose(cross, 0.0, atol=1e-12)

    def test_filtering_beats_raw_under_jitter(self):
        profile = make_subject(0, 1.0)
        angles = joint_trajectories(profile, None, duration_s=6.0, rate_hz=150.0)
        frames = simulate_keypoints(angles, profile, jitter_std_m=0.01, seed=3)
        truth = angles_matrix(angles)
        filtered = angles_matrix(extract_angle_labels(frames, SavGolSpec(50, 4)))
        raw = np.array([frame_angles(f, "flexion") for f in frames])
        assert np.sqrt(((filtered - truth) ** 2).mean()) < np.sqrt(((raw - truth) ** 2).mean())

    def test_deterministic_under_seed(self):
        profile = make_subject(0, 1.0)
        angles = joint_trajectories(profile, None, duration_s=1.0)
        a = simulate_keypoints(angles, profile, 0.01, 0.005, seed=9)
        b = simulate_keypoints(angles, profile, 0.01, 0.005, seed=9)
        assert all(
            np.array_equal(x.joints[j].as_array(), y.joints[j].as_array())
            for x, y in zip(a, b)
            for j in x.joints
        )


class TestImu:
    def test_static_standing(self):
        profile = make_subject(0, 0.0)
        angles = joint_trajectories(profile, None, duration_s=1.0)
        samples = simulate_imu(angles, profile)
        mat = np.array([s.channels for s in samples])
        for imu in range(3):
            acc = mat[:, imu * 6 : imu * 6 + 3]
            gyr = mat[:, imu * 6 + 3 : imu * 6 + 6]
            np.testing.assert_allclose(np.linalg.norm(acc, axis=1), 9.81, atol=1e-9)
            np.testing.assert_allclose(gyr, 0.0, atol=1e-12)

    def test_constant_rate_gyro(self):
        profile = make_subject(0, 0.0)
        omega = 0.4  # rad/s
        t = np.arange(200) / 50.0
        angles = [
            JointAngleFrame(time_s=float(tt), r_hip=float(np.degrees(omega) * tt),
                            l_hip=0.0, r_knee=0.0, l_knee=0.0)
            for tt in t
        ]
        samples = simulate_imu(angles, profile)
        gy = np.array([s.channels[16] for s in samples])  # r_thigh gyro y
        np.testing.assert_allclose(gy[2:-2], omega, atol=1e-6)

    def test_sinusoid_gyro_matches_derivative(self):
        profile = make_subject(0, 0.0)
        t = np.arange(500) / 50.0
        hip = 10.0 * np.sin(2 * np.pi * t)
        angles = [
            JointAngleFrame(time_s=float(tt), r_hip=float(h), l_hip=0.0,
                            r_knee=0.0, l_knee=0.0)
            for tt, h in zip(t, hip)
        ]
        samples = simulate_imu(angles, profile)
        gy = np.array([s.channels[16] for s in samples])
        analytic = np.radians(10.0) * 2 * np.pi * np.cos(2 * np.pi * t)
        # second-order central difference error bound: (h^2/6) * |f'''|
        bound = (0.02**2 / 6) * np.radians(10.0) * (2 * np.pi) ** 3 + 1e-9
        assert np.max(np.abs(gy[1:-1] - analytic[1:-1])) < bound

    def test_energy_sanity(self):
        for speed in (0.4, 0.9, 1.5):
            profile = make_subject(0, speed)
            angles = joint_trajectories(profile, None, duration_s=10.0)
            samples = simulate_imu(angles, profile)
            mat = np.array([s.channels for s in samples])
            for imu in range(3):
                acc = mat[:, imu * 6 : imu * 6 + 3]
                mean_norm = np.linalg.norm(acc, axis=1).mean()
                assert 8.5 <= mean_norm <= 11.5

    def test_rate_mismatch(self):
        profile = make_subject(0, 1.0)
        angles = joint_trajectories(profile, None, duration_s=1.0, rate_hz=100.0)
        with pytest.raises(RateMismatch):
            simulate_imu(angles, profile, rate_hz=50.0)

    def test_deterministic(self):
        profile = make_subject(0, 1.0)
        angles = joint_trajectories(profile, None, duration_s=2.0)
        a = simulate_imu(angles, profile, 0.3, 0.02, seed=4)
        b = simulate_imu(angles, profile, 0.3, 0.02, seed=4)
        assert all(x.channels == y.channels for x, y in zip(a, b))


class TestProtocol:
    def test_training_protocol_shape(self):
        recs = training_protocol(make_subject(0, 1.0), None, SynthNoise(), seed=0)
        assert len(recs) == 4
        assert [r.speed_mps for r in recs] == [0.4, 0.7, 1.0, 1.3]
        for rec in recs:
            assert len(rec.imu) == 3000
            assert len(rec.angles_truth) == 3000
            assert not rec.sk
            dt = np.diff([s.time_s for s in rec.imu])
            np.testing.assert_allclose(dt, 0.02, atol=1e-12)

    def test_sk_protocol_tags(self):
        recs = training_protocol(
            make_subject(0, 1.0, braced=True), StiffKneeSpec(), SynthNoise(), seed=0
        )
        assert all(r.sk for r in recs)
        for rec in recs:
            knee = np.array([a.r_knee for a in rec.angles_truth])
            assert knee.max() <= 25.0

    def test_hpe_labels_aligned(self):
        recs = training_protocol(make_subject(0, 1.0), None, SynthNoise(), seed=0)
        labels = hpe_labels(recs[2])
        assert len(labels) == len(recs[2].imu)
        for lab, imu in zip(labels[::250], recs[2].imu[::250]):
            assert abs(lab.time_s - imu.time_s) < 1e-9
        err = angles_matrix(labels) - angles_matrix(recs[2].angles_truth)
        assert np.sqrt((err**2).mean()) < 2.0  # noisy vision labels, but sane

    def test_validation_recording(self):
        rec = validation_recording(make_subject(0, 1.0), None, SynthNoise(), seed=0)
        assert len(rec.imu) == round(185.0 * 50)
        assert rec.speed_profile is not None


class TestSpeedProfile:
    def test_duration_exact(self):
        assert validation_speed_profile().duration_s == 185.0

    def test_max_slope(self):
        assert validation_speed_profile().max_slope() == pytest.approx(0.5, abs=1e-9)

    def test_plateau_order(self):
        assert validation_speed_profile().plateau_speeds() == [1.1, 0.5, 1.2, 0.6]

    def test_profiled_trajectories_ramp_in(self):
        profile = make_subject(0, 1.0)
        frames = joint_trajectories_profiled(profile, validation_speed_profile(), None)
        mat = angles_matrix(frames)
        assert len(frames) == round(185.0 * 50)
        assert np.abs(mat[0]).max() < 1e-9  # standing start
        assert mat[:, 2].max() > 35.0  # walking later
