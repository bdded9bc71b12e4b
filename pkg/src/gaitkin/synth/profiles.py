"""Synthetic subject profiles and treadmill speed profiles.

A subject is a small Fourier model of sagittal hip/knee trajectories per
side plus segment lengths. Harmonic k contributes amp * cos(2*pi*k*phase
+ ph); harmonic 0 is the mean. Cadence follows speed as
0.6 + 0.55 * speed (cycles/s), clamped to [0.6, 1.6], and the whole
curve is scaled by a speed factor that vanishes at standstill:

    scale(s) = (0.7 + 0.3 * min(s, 1.5)) * min(s / 0.2, 1)

so 1.0 m/s walks at the nominal amplitudes. Three default subjects per
population perturb the base amplitudes and segment lengths by up to
+/-10%. Braced (stiff-knee) subjects additionally carry hip
compensation on the braced side: larger hip amplitude, a small phase
advance, and a raised mean, mirroring how a locked knee is cleared
during swing; the knee clamp itself is applied at trajectory time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

Harmonics = tuple[tuple[float, float], ...]  # (amplitude_deg, phase_rad) per harmonic

CADENCE_MIN = 0.6
CADENCE_MAX = 1.6

# nominal trajectories at 1.0 m/s (flexion convention, degrees)
BASE_HIP: Harmonics = ((10.0, 0.0), (22.0, 0.0))
BASE_KNEE: Harmonics = (
    (20.0, 0.0),
    (18.0, -2.0 * np.pi * 0.70),
    (10.0, -4.0 * np.pi * 0.15),
)


def cadence_for_speed(speed_mps: float) -> float:
    return float(np.clip(0.6 + 0.55 * speed_mps, CADENCE_MIN, CADENCE_MAX))


def amplitude_scale(speed_mps: float) -> float:
    if speed_mps <= 0.0:
        return 0.0
    return (0.7 + 0.3 * min(speed_mps, 1.5)) * min(speed_mps / 0.2, 1.0)


@dataclass(frozen=True)
class GaitProfile:
    """One synthetic subject at one nominal speed."""

    speed_mps: float
    r_hip: Harmonics = BASE_HIP
    l_hip: Harmonics = BASE_HIP
    r_knee: Harmonics = BASE_KNEE
    l_knee: Harmonics = BASE_KNEE
    phase_offset: float = 0.5  # left-right offset, cycles
    thigh_m: float = 0.45
    shank_m: float = 0.43
    trunk_m: float = 0.50
    hip_halfwidth_m: float = 0.10

    def __post_init__(self):
        if self.speed_mps < 0:
            raise ValueError("speed must be >= 0")
        for name in ("thigh_m", "shank_m", "trunk_m", "hip_halfwidth_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        for series in (self.r_hip, self.l_hip, self.r_knee, self.l_knee):
            if any(amp < 0 for amp, _ in series):
                raise ValueError("harmonic amplitudes must be >= 0")

    @property
    def cadence_hz(self) -> float:
        return cadence_for_speed(self.speed_mps)


@dataclass(frozen=True)
class StiffKneeSpec:
    """Soft ceiling on one knee's flexion, standing in for a brace."""

    side: str = "right"
    max_flexion_deg: float = 20.0
    softness_deg: float = 5.0

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        if self.max_flexion_deg < 0 or self.softness_deg < 0:
            raise ValueError("max_flexion and softness must be >= 0")


def _scale_harmonics(series: Harmonics, factor: float) -> Harmonics:
    return tuple((amp * factor, ph) for amp, ph in series)


def _shift_harmonics(series: Harmonics, phase_rad_per_harmonic: float) -> Harmonics:
    return tuple((amp, ph + k * phase_rad_per_harmonic) for k, (amp, ph) in enumerate(series))


def make_subject(variant: int, speed_mps: float, braced: bool = False) -> GaitProfile:
    """Deterministic subject factory; variants perturb the base by <=10%."""
    rng = np.random.default_rng(1000 + variant)
    tweak = lambda: 1.0 + 0.1 * float(rng.uniform(-1.0, 1.0))  # noqa: E731
    profile = GaitProfile(
        speed_mps=speed_mps,
        r_hip=_scale_harmonics(BASE_HIP, tweak()),
        l_hip=_scale_harmonics(BASE_HIP, tweak()),
        r_knee=_scale_harmonics(BASE_KNEE, tweak()),
        l_knee=_scale_harmonics(BASE_KNEE, tweak()),
        thigh_m=0.45 * tweak(),
        shank_m=0.43 * tweak(),
        trunk_m=0.50 * tweak(),
    )
    if braced:
        # swing-phase clearance compensation around the stiff (right) knee
        r_hip = _shift_harmonics(_scale_harmonics(profile.r_hip, 1.35), 0.6)
        r_hip = ((r_hip[0][0] + 5.0, r_hip[0][1]),) + r_hip[1:]
        profile = replace(
            profile,
            r_hip=r_hip,
            l_hip=_shift_harmonics(_scale_harmonics(profile.l_hip, 1.15), -0.2),
        )
    return profile


@dataclass(frozen=True)
class SpeedProfile:
    """Piecewise-linear treadmill speed: list of (time_s, speed_mps) knots."""

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ts = [t for t, _ in self.knots]
        if len(self.knots) < 2:
            raise ValueError("need at least two knots")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("knot times must be strictly increasing")
        if any(v < 0 for _, v in self.knots):
            raise ValueError("speeds must be >= 0")

    @property
    def duration_s(self) -> float:
        return self.knots[-1][0] - self.knots[0][0]

    def speed_at(self, t) -> np.ndarray:
        ts = np.array([k[0] for k in self.knots])
        vs = np.array([k[1] for k in self.knots])
        return np.interp(t, ts, vs)

    def max_slope(self) -> float:
        out = 0.0
        for (t0, v0), (t1, v1) in zip(self.knots, self.knots[1:]):
            out = max(out, abs(v1 - v0) / (t1 - t0))
        return out

    def segments(self) -> list[tuple[float, float, str]]:
        """(t0, t1, label) spans; plateaus labeled by speed, ramps 'transient'."""
        out = []
        for (t0, v0), (t1, v1) in zip(self.knots, self.knots[1:]):
            label = f"{v0:g}" if v0 == v1 else "transient"
            out.append((t0, t1, label))
        return out

    def plateau_speeds(self) -> list[float]:
        return [float(s[2]) for s in self.segments() if s[2] != "transient"]


TRAINING_SPEEDS = (0.4, 0.7, 1.0, 1.3)

VALIDATION_PLATEAUS = (1.1, 0.5, 1.2, 0.6)
VALIDATION_RAMP_MPS2 = 0.5
VALIDATION_TOTAL_S = 185.0


def validation_speed_profile() -> SpeedProfile:
    """0 -> 1.1 -> 0.5 -> 1.2 -> 0.6 -> 0 m/s, ramps at 0.5 m/s2, 185 s.

    Plateau durations are equal; ramp time is fixed by the speed deltas
    (3.6 m/s of total change -> 7.2 s), leaving 44.45 s per plateau.
    """
    speeds = (0.0, *VALIDATION_PLATEAUS, 0.0)
    ramp_total = sum(abs(b - a) for a, b in zip(speeds, speeds[1:])) / VALIDATION_RAMP_MPS2
    plateau = (VALIDATION_TOTAL_S - ramp_total) / len(VALIDATION_PLATEAUS)
    knots = [(0.0, 0.0)]
    t = 0.0
    v = 0.0
    for target in (*VALIDATION_PLATEAUS, 0.0):
        t += abs(target - v) / VALIDATION_RAMP_MPS2
        v = target
        knots.append((t, v))
        if target != 0.0:
            t += plateau
            knots.append((t, v))
    # pin the terminal knot against float accumulation drift
    assert abs(t - VALIDATION_TOTAL_S) < 1e-9
    knots[-1] = (VALIDATION_TOTAL_S, 0.0)
    return SpeedProfile(knots=tuple(knots))
