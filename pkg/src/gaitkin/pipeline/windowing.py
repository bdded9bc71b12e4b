"""Supervised windowing of aligned IMU/label streams, splits, and mixing.

A dataset item is a causal (channels x window_len) input window ending
at some tick, targeted at the label of that final tick; windows ending
before a full window's worth of samples are zero-padded on the left,
matching the warmup behavior of the streaming path.

Train/test splits take the contiguous final fraction of each recording
and drop the trailing training items whose windows would share samples
with any test window (an embargo of at most window_len - 1 items per
recording), so the two sides touch disjoint samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from gaitkin.errors import DatasetTooSmall, InsufficientSK, Misaligned
from gaitkin.geometry.angles import JointAngleFrame
from gaitkin.synth.imu import ImuSample, imu_matrix

ALIGN_TOL_S = 1e-6


@dataclass(frozen=True)
class ItemTags:
    population: str          # "AB" or "SK"
    speed_mps: float | None  # None for profiled recordings
    recording_id: str
    t_end_s: float


@dataclass
class WindowedDataset:
    windows: np.ndarray        # (n, channels, window_len)
    targets: np.ndarray        # (n, out_dim)
    tags: list[ItemTags]
    dt_s: float
    end_indices: np.ndarray    # source tick index of each window end

    def __len__(self) -> int:
        return self.windows.shape[0]

    @property
    def window_len(self) -> int:
        return self.windows.shape[2]

    def subset(self, indices) -> "WindowedDataset":
        indices = np.asarray(indices, dtype=np.intp)
        return WindowedDataset(
            windows=self.windows[indices],
            targets=self.targets[indices],
            tags=[self.tags[i] for i in indices],
            dt_s=self.dt_s,
            end_indices=self.end_indices[indices],
        )


def window_dataset(
    imu: Sequence[ImuSample],
    labels: Sequence[JointAngleFrame],
    window_len: int,
    stride: int = 1,
    population: str = "AB",
    speed_mps: float | None = None,
    recording_id: str = "rec",
) -> WindowedDataset:
    """One item per ``stride`` ticks, starting at tick 0."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    t_imu, x = imu_matrix(imu)
    t_lab = np.array([f.time_s for f in labels])
    if len(t_imu) != len(t_lab):
        raise Misaligned(f"{len(t_imu)} IMU samples vs {len(t_lab)} labels")
    if len(t_imu) < window_len:
        raise DatasetTooSmall(f"{len(t_imu)} samples < window_len {window_len}")
    offs = np.abs(t_imu - t_lab)
    if offs.max() > ALIGN_TOL_S:
        i = int(offs.argmax())
        raise Misaligned(
            f"timestamp mismatch of {offs.max():.3e} s at tick {i} "
            f"(imu {t_imu[i]}, label {t_lab[i]})"
        )

    ends = np.arange(0, len(t_imu), stride)
    windows = np.zeros((len(ends), x.shape[0], window_len))
    for i, end in enumerate(ends):
        start = end - window_len + 1
        src = x[:, max(start, 0) : end + 1]
        windows[i, :, window_len - src.shape[1] :] = src
    targets = np.array([labels[end].as_array() for end in ends])
    dt = float((t_imu[-1] - t_imu[0]) / (len(t_imu) - 1)) if len(t_imu) > 1 else 0.0
    tags = [
        ItemTags(
            population=population,
            speed_mps=speed_mps,
            recording_id=recording_id,
            t_end_s=float(t_imu[end]),
        )
        for end in ends
    ]
    return WindowedDataset(
        windows=windows,
        targets=targets,
        tags=tags,
        dt_s=dt,
        end_indices=ends.astype(np.intp),
    )


def concat_datasets(datasets: Sequence[WindowedDataset]) -> WindowedDataset:
    if not datasets:
        raise ValueError("nothing to concatenate")
    first = datasets[0]
    for ds in datasets[1:]:
        if ds.window_len != first.window_len:
            raise DatasetTooSmall("window lengths differ between datasets")
        if abs(ds.dt_s - first.dt_s) > ALIGN_TOL_S:
            raise Misaligned("tick spacing differs between datasets")
    return WindowedDataset(
        windows=np.concatenate([ds.windows for ds in datasets]),
        targets=np.concatenate([ds.targets for ds in datasets]),
        tags=[t for ds in datasets for t in ds.tags],
        dt_s=first.dt_s,
        end_indices=np.concatenate([ds.end_indices for ds in datasets]),
    )


def _recording_groups(ds: WindowedDataset) -> dict[str, list[int]]:
    """Item indices per recording, in time order, recordings in first-seen order."""
    groups: dict[str, list[int]] = {}
    for i, tag in enumerate(ds.tags):
        groups.setdefault(tag.recording_id, []).append(i)
    for rec_id, idx in groups.items():
        idx.sort(key=lambda i: ds.tags[i].t_end_s)
    return groups


class Split(NamedTuple):
    train: WindowedDataset
    test: WindowedDataset
    n_boundary_dropped: int


def split_train_test(ds: WindowedDataset, test_fraction: float = 0.1) -> Split:
    """Per recording: the contiguous final fraction to test, embargo in between."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    train_idx: list[int] = []
    test_idx: list[int] = []
    dropped = 0
    span = ds.window_len - 1  # ticks a window reaches back
    for rec_id, idx in _recording_groups(ds).items():
        n_test = int(round(test_fraction * len(idx)))
        if n_test == 0:
            train_idx.extend(idx)
            continue
        head, tail = idx[: len(idx) - n_test], idx[len(idx) - n_test :]
        test_idx.extend(tail)
        first_test_sample = int(ds.end_indices[tail[0]]) - span
        kept = [i for i in head if int(ds.end_indices[i]) < first_test_sample]
        dropped += len(head) - len(kept)
        train_idx.extend(kept)
    if not test_idx or not train_idx:
        raise DatasetTooSmall(
            f"split left {len(train_idx)} train / {len(test_idx)} test items"
        )
    return Split(ds.subset(train_idx), ds.subset(test_idx), dropped)


def split_validation_tail(ds: WindowedDataset, fraction: float) -> tuple[WindowedDataset, WindowedDataset]:
    """Contiguous per-recording tail for early-stopping validation.

    No embargo: overlap between training and validation windows is
    accepted for the stopping heuristic. The tail size rounds up, so
    every recording with at least two items donates at least one;
    otherwise the stopping metric would ignore small recordings
    entirely (and with them, the data one most wants to track when
    fine-tuning on a small admixture).
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    groups = _recording_groups(ds)
    train_idx: list[int] = []
    val_idx: list[int] = []
    for idx in groups.values():
        n_val = min(int(np.ceil(fraction * len(idx))), len(idx) - 1) if len(idx) > 1 else 0
        train_idx.extend(idx[: len(idx) - n_val])
        val_idx.extend(idx[len(idx) - n_val :])
    if not val_idx and len(train_idx) > 1:
        val_idx = [train_idx.pop()]
    if not val_idx or not train_idx:
        raise DatasetTooSmall("dataset too small for a validation split")
    return ds.subset(train_idx), ds.subset(val_idx)


def sk_quota_indices(n_ab: int, sk: WindowedDataset, sk_fraction: float) -> list[int]:
    """SK item indices whose count makes SK items ``sk_fraction`` of the mix.

    The count solves n_sk / (n_ab + n_sk) = sk_fraction, rounded to the
    nearest item; it is spread as evenly as possible over the SK speed
    conditions and, within a condition, over its recordings as
    time-contiguous prefixes (earliest items first).
    """
    if not 0.0 <= sk_fraction <= 1.0:
        raise ValueError("sk_fraction must be in [0, 1]")
    if sk_fraction == 0.0:
        return []
    if sk_fraction == 1.0:
        if n_ab:
            raise InsufficientSK("fraction 1.0 is impossible with AB items present")
        return list(range(len(sk)))
    n_sk = int(round(sk_fraction * n_ab / (1.0 - sk_fraction)))
    if n_sk > len(sk):
        raise InsufficientSK(f"need {n_sk} SK items, have {len(sk)}")
    if n_sk == 0:
        return []

    by_speed: dict[float, dict[str, list[int]]] = {}
    for i, tag in enumerate(sk.tags):
        by_speed.setdefault(tag.speed_mps, {}).setdefault(tag.recording_id, []).append(i)
    speeds = sorted(by_speed, key=lambda s: (s is None, s))
    quotas = _spread(n_sk, len(speeds))
    warm_end = sk.window_len - 1  # first tick with a fully populated window
    picked: list[int] = []
    for speed, quota in zip(speeds, quotas):
        recs = by_speed[speed]
        for rec_id in recs:
            # earliest fully-populated windows first: a prefix of warmup
            # windows is mostly left zero-padding, not gait data
            recs[rec_id].sort(
                key=lambda i: (int(sk.end_indices[i]) < warm_end, sk.tags[i].t_end_s)
            )
        rec_ids = sorted(recs)
        shares = _spread(quota, len(rec_ids))
        for rec_id, share in zip(rec_ids, shares):
            if share > len(recs[rec_id]):
                raise InsufficientSK(
                    f"speed condition {speed}: recording {rec_id} has "
                    f"{len(recs[rec_id])} items, need {share}"
                )
            picked.extend(recs[rec_id][:share])
    return picked


def mix_datasets(ab: WindowedDataset, sk: WindowedDataset, sk_fraction: float) -> WindowedDataset:
    """All AB items plus the earliest contiguous SK run per speed condition."""
    picked = sk_quota_indices(len(ab), sk, sk_fraction)
    if not picked:
        return ab
    if len(ab) == 0:
        return sk.subset(picked)
    return concat_datasets([ab, sk.subset(picked)])


def _spread(total: int, bins: int) -> list[int]:
    base, rem = divmod(total, bins)
    return [base + (1 if i < rem else 0) for i in range(bins)]
