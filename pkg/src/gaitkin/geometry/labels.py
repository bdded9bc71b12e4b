"""Angle label streams from keypoint sequences.

Angles are computed frame-wise, then each of the four channels is
smoothed independently. Frames missing a canonical joint are linearly
interpolated from their neighbors when the run of incomplete frames is
short (<= max_gap); longer runs either split the sequence into
independently-filtered segments or raise, depending on policy.
Incomplete frames at the very start or end have no neighbor on one side
and are trimmed.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from gaitkin.errors import GapTooLarge, SeriesTooShort
from gaitkin.geometry.angles import ANGLE_CHANNELS, JointAngleFrame, KeypointFrame, frame_angles
from gaitkin.geometry.savgol import SavGolSpec, savgol_filter

DEFAULT_MAX_GAP = 5


def extract_angle_labels(
    frames: Sequence[KeypointFrame],
    spec: SavGolSpec = SavGolSpec(),
    convention: str = "flexion",
    max_gap: int = DEFAULT_MAX_GAP,
    on_large_gap: str = "split",
) -> list[JointAngleFrame]:
    """Convert a keypoint sequence into smoothed joint-angle frames.

    Parameters
    ----------
    frames : keypoint frames with strictly increasing timestamps.
    spec : smoothing window/order.
    convention : 'flexion' (signed hips) or 'raw'.
    max_gap : longest run of incomplete frames bridged by linear
        interpolation of the angle channels.
    on_large_gap : 'split' filters each side of an oversized gap
        independently (frames inside the gap are dropped); 'error'
        raises GapTooLarge.
    """
    if on_large_gap not in ("split", "error"):
        raise ValueError(f"on_large_gap must be 'split' or 'error', got {on_large_gap!r}")
    frames = list(frames)
    _check_monotone(frames)

    times = np.array([f.time_s for f in frames])
    values = np.full((len(frames), 4), np.nan)
    for i, frame in enumerate(frames):
        if frame.is_complete():
            values[i] = frame_angles(frame, convention)

    segments = _segment_indices(values, max_gap)
    if on_large_gap == "error" and len(segments) != 1:
        gaps = _oversized_gaps(values, max_gap)
        start, end = gaps[0]
        raise GapTooLarge(float(times[start]), float(times[end - 1]), end - start)

    out: list[JointAngleFrame] = []
    for lo, hi in segments:
        seg = _interpolate(values[lo:hi], times[lo:hi])
        if seg.shape[0] < spec.window:
            raise SeriesTooShort(
                f"segment of {seg.shape[0]} frames starting at t={times[lo]:.3f}s "
                f"is shorter than the filter window ({spec.window})"
            )
        smooth = np.column_stack([savgol_filter(seg[:, k], spec) for k in range(4)])
        for i in range(seg.shape[0]):
            out.append(
                JointAngleFrame(
                    time_s=float(times[lo + i]),
                    **{name: float(smooth[i, k]) for k, name in enumerate(ANGLE_CHANNELS)},
                )
            )
    return out


def _check_monotone(frames: Sequence[KeypointFrame]):
    for a, b in zip(frames, frames[1:]):
        if not b.time_s > a.time_s:
            raise ValueError(
                f"frame timestamps must be strictly increasing ({a.time_s} -> {b.time_s})"
            )


def _gap_runs(valid: np.ndarray) -> list[tuple[int, int]]:
    """Half-open [start, end) runs of invalid rows."""
    runs = []
    start = None
    for i, ok in enumerate(valid):
        if not ok and start is None:
            start = i
        elif ok and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(valid)))
    return runs


def _oversized_gaps(values: np.ndarray, max_gap: int) -> list[tuple[int, int]]:
    valid = ~np.isnan(values[:, 0])
    n = len(valid)
    out = []
    for start, end in _gap_runs(valid):
        interior = start > 0 and end < n
        if not interior or end - start > max_gap:
            out.append((start, end))
    return out


def _segment_indices(values: np.ndarray, max_gap: int) -> list[tuple[int, int]]:
    """Complete-frame segments delimited by oversized or boundary gaps."""
    n = values.shape[0]
    cuts = _oversized_gaps(values, max_gap)
    segments = []
    lo = 0
    for start, end in cuts:
        if start > lo:
            segments.append((lo, start))
        lo = end
    if lo < n:
        segments.append((lo, n))
    return segments


def _interpolate(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Fill interior NaN runs channel-wise, linear in time."""
    filled = values.copy()
    valid = ~np.isnan(values[:, 0])
    if valid.all():
        return filled
    idx = np.flatnonzero(valid)
    for k in range(4):
        filled[:, k] = np.interp(times, times[idx], values[idx, k])
    return filled
