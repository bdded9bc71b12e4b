"""Angle primitives against an extended-precision oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaitkin.errors import DegenerateVector, MissingJoint
from gaitkin.geometry import (
    Keypoint3D,
    KeypointFrame,
    angle_between,
    hip_angle,
    knee_angle,
    to_flexion_convention,
)


def oracle_angle(u, v) -> float:
    """arccos of the normalized dot product, computed in 80-bit floats."""
    u = np.asarray(u, dtype=np.longdouble)
    v = np.asarray(v, dtype=np.longdouble)
    c = (u @ v) / (np.sqrt(u @ u) * np.sqrt(v @ v))
    c = np.clip(c, -1.0, 1.0)
    return float(np.degrees(np.arccos(c)))


def make_frame(**joints) -> KeypointFrame:
    return KeypointFrame(time_s=0.0, joints={k: Keypoint3D(*v) for k, v in joints.items()})


STANDING = dict(
    pelvis=(0, 0.9, 0),
    spine=(0, 1.4, 0),
    l_hip=(0, 0.9, -0.1),
    r_hip=(0, 0.9, 0.1),
    l_knee=(0, 0.45, -0.1),
    r_knee=(0, 0.45, 0.1),
    l_ankle=(0, 0.0, -0.1),
    r_ankle=(0, 0.0, 0.1),
)


class TestAngleBetween:
    def test_parallel(self):
        assert angle_between((0, 1, 0), (0, 2, 0)) == 0.0

    def test_orthogonal(self):
        assert angle_between((1, 0, 0), (0, 1, 0)) == 90.0

    def test_diagonal(self):
        assert angle_between((1, 0, 0), (1, 1, 0)) == pytest.approx(45.0, abs=1e-12)

    def test_zero_dot(self):
        assert angle_between((1, 2, 2), (2, 1, -2)) == pytest.approx(90.0, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateVector):
            angle_between((0, 0, 0), (1, 0, 0))
        with pytest.raises(DegenerateVector):
            angle_between((1, 0, 0), (1e-10, 0, 0))

    def test_matches_oracle_on_random_pairs(self):
        rng = np.random.default_rng(42)
        u = rng.standard_normal((20000, 3))
        v = rng.standard_normal((20000, 3))
        for i in range(0, 20000, 997):
            assert angle_between(u[i], v[i]) == pytest.approx(
                oracle_angle(u[i], v[i]), abs=1e-9
            )

    @given(
        st.tuples(*[st.floats(-10, 10) for _ in range(3)]),
        st.tuples(*[st.floats(-10, 10) for _ in range(3)]),
    )
    @settings(max_examples=200)
    def test_symmetry(self, u, v):
        if np.linalg.norm(u) > 1e-6 and np.linalg.norm(v) > 1e-6:
            assert angle_between(u, v) == angle_between(v, u)

    @given(
        st.floats(1e-3, 1e3),
        st.floats(1e-3, 1e3),
    )
    @settings(max_examples=200)
    def test_scale_invariance(self, a, b):
        u = np.array([0.3, -1.2, 2.0])
        v = np.array([-0.7, 0.4, 1.1])
        assert angle_between(a * u, b * v) == pytest.approx(angle_between(u, v), abs=1e-9)


class TestHipKnee:
    def test_standing_hip_raw_180(self):
        frame = make_frame(**STANDING)
        assert hip_angle(frame, "right") == pytest.approx(180.0, abs=1e-9)
        assert hip_angle(frame, "left") == pytest.approx(180.0, abs=1e-9)

    def test_thigh_horizontal_forward(self):
        joints = dict(STANDING)
        joints["r_knee"] = (0.45, 0.9, 0.1)  # knee straight forward of the hip
        frame = make_frame(**joints)
        assert hip_angle(frame, "right") == pytest.approx(90.0, abs=1e-9)

    def test_straight_leg_knee_zero(self):
        frame = make_frame(**STANDING)
        assert knee_angle(frame, "right") == pytest.approx(0.0, abs=1e-9)

    def test_bent_knee_90(self):
        joints = dict(STANDING)
        joints["r_hip"] = (0, 1, 0.1)
        joints["r_knee"] = (0, 0.5, 0.1)
        joints["r_ankle"] = (0.5, 0.5, 0.1)
        frame = make_frame(**joints)
        assert knee_angle(frame, "right") == pytest.approx(90.0, abs=1e-9)

    def test_straight_leg_rotation_invariant(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            hip = rng.standard_normal(3)
            direction = rng.standard_normal(3)
            direction /= np.linalg.norm(direction)
            knee = hip + 0.45 * direction
            ankle = knee + 0.43 * direction
            joints = dict(STANDING)
            joints["r_hip"], joints["r_knee"], joints["r_ankle"] = map(tuple, (hip, knee, ankle))
            assert knee_angle(make_frame(**joints), "right") == pytest.approx(0.0, abs=1e-9)

    def test_missing_joint(self):
        joints = dict(STANDING)
        del joints["r_knee"]
        with pytest.raises(MissingJoint, match="r_knee"):
            hip_angle(make_frame(**joints), "right")

    def test_matches_oracle_on_arbitrary_frame(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            joints = {k: tuple(np.array(v) + rng.normal(0, 0.05, 3)) for k, v in STANDING.items()}
            frame = make_frame(**joints)
            spine = np.array(joints["spine"]) - np.array(joints["pelvis"])
            thigh = np.array(joints["r_knee"]) - np.array(joints["r_hip"])
            assert hip_angle(frame, "right") == pytest.approx(
                oracle_angle(spine, thigh), abs=1e-9
            )
            shank = np.array(joints["r_ankle"]) - np.array(joints["r_knee"])
            assert knee_angle(frame, "right") == pytest.approx(
                oracle_angle(thigh, shank), abs=1e-9
            )


class TestFlexionConvention:
    def test_standing_maps_to_zero(self):
        frame = make_frame(**STANDING)
        assert to_flexion_convention(180.0, frame, "right") == pytest.approx(0.0)

    def test_anterior_thigh_positive(self):
        joints = dict(STANDING)
        th = math.radians(30)
        joints["r_knee"] = (0.45 * math.sin(th), 0.9 - 0.45 * math.cos(th), 0.1)
        frame = make_frame(**joints)
        raw = hip_angle(frame, "right")
        assert to_flexion_convention(raw, frame, "right") == pytest.approx(30.0, abs=1e-9)

    def test_posterior_thigh_negative(self):
        # cross-product oracle: forward = (l_hip - r_hip) x trunk-up points
        # along +x for this frame, and the thigh projects onto -x
        joints = dict(STANDING)
        th = math.radians(-20)
        joints["r_knee"] = (0.45 * math.sin(th), 0.9 - 0.45 * math.cos(th), 0.1)
        frame = make_frame(**joints)
        forward = np.cross(
            np.array(joints["l_hip"]) - np.array(joints["r_hip"]),
            np.array(joints["spine"]) - np.array(joints["pelvis"]),
        )
        thigh = np.array(joints["r_knee"]) - np.array(joints["r_hip"])
        assert float(np.dot(thigh, forward)) < 0
        raw = hip_angle(frame, "right")
        assert to_flexion_convention(raw, frame, "right") == pytest.approx(-20.0, abs=1e-9)

    def test_coincident_hips(self):
        joints = dict(STANDING)
        joints["l_hip"] = joints["r_hip"]
        frame = make_frame(**joints)
        with pytest.raises(DegenerateVector):
            to_flexion_convention(170.0, frame, "right")


class TestKeypointTypes:
    def test_confidence_range(self):
        with pytest.raises(ValueError):
            Keypoint3D(0, 0, 0, confidence=1.5)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            Keypoint3D(float("nan"), 0, 0)

    def test_frame_completeness(self):
        assert make_frame(**STANDING).is_complete()
        partial = dict(STANDING)
        del partial["spine"]
        assert not make_frame(**partial).is_complete()
