"""Experiment orchestration: populations, adaptation, sweeps, matrices.

The canonical setup builds three able-bodied subjects and their braced
(stiff-knee) counterparts. Able-bodied training windows carry
ground-truth targets; stiff-knee training windows carry labels
extracted from the simulated vision pipeline (noisy keypoints, smoothed)
because that is the label source available for a new gait pattern.
Evaluation is always against ground truth: the per-recording 10% test
tails for adaptation studies, and the 185 s multi-speed validation
trial for the model-by-subject matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from gaitkin.geometry.savgol import SavGolSpec
from gaitkin.pipeline.metrics import EvalReport, rmse_report
from gaitkin.pipeline.windowing import (
    WindowedDataset,
    concat_datasets,
    mix_datasets,
    sk_quota_indices,
    split_train_test,
    window_dataset,
)
from gaitkin.synth.imu import imu_matrix
from gaitkin.synth.profiles import StiffKneeSpec, make_subject
from gaitkin.synth.protocol import (
    Recording,
    SynthNoise,
    hpe_labels,
    training_protocol,
    validation_recording,
)
from gaitkin.tcn.config import TcnConfig, TrainConfig
from gaitkin.tcn.model import TcnModel, batch_forward
from gaitkin.tcn.training import fine_tune, predict_dataset, train

EVAL_CHUNK = 128


@dataclass(frozen=True)
class ExperimentSpec:
    """Scale and noise of the synthetic experiment."""

    subjects: int = 3
    stride_train: int = 40
    stride_eval: int = 25
    test_fraction: float = 0.1
    noise: SynthNoise = SynthNoise()
    sk_spec: StiffKneeSpec = StiffKneeSpec()
    sg: SavGolSpec = SavGolSpec()
    data_seed: int = 7


@dataclass
class ExperimentData:
    """Windowed datasets and validation recordings for one setup."""

    ab_train: WindowedDataset      # truth-labeled AB windows
    sk_train: WindowedDataset      # vision-labeled SK windows, test tails removed
    sk_test: WindowedDataset       # truth-labeled SK test tails
    ab_validation: list[Recording]
    sk_validation: list[Recording]
    spec: ExperimentSpec
    config: TcnConfig
    n_boundary_dropped: int


def build_experiment_data(
    spec: ExperimentSpec = ExperimentSpec(), config: TcnConfig = TcnConfig()
) -> ExperimentData:
    ab_sets = []
    sk_hpe_sets = []
    sk_truth_sets = []
    ab_validation = []
    sk_validation = []
    for v in range(spec.subjects):
        ab_subject = make_subject(v, 1.0, braced=False)
        for rec in training_protocol(
            ab_subject, None, spec.noise, seed=spec.data_seed + v, id_prefix=f"ab{v}"
        ):
            ab_sets.append(_windows(rec, rec.angles_truth, config, spec.stride_train))
        ab_validation.append(
            validation_recording(
                ab_subject, None, spec.noise, seed=spec.data_seed + v, rec_id=f"ab{v}_val"
            )
        )

        sk_subject = make_subject(v, 1.0, braced=True)
        for rec in training_protocol(
            sk_subject, spec.sk_spec, spec.noise, seed=spec.data_seed + 50 + v, id_prefix=f"sk{v}"
        ):
            sk_hpe_sets.append(_windows(rec, hpe_labels(rec, spec.sg), config, spec.stride_train))
            sk_truth_sets.append(_windows(rec, rec.angles_truth, config, spec.stride_train))
        sk_validation.append(
            validation_recording(
                sk_subject,
                spec.sk_spec,
                spec.noise,
                seed=spec.data_seed + 50 + v,
                rec_id=f"sk{v}_val",
            )
        )

    sk_hpe = concat_datasets(sk_hpe_sets)
    sk_truth = concat_datasets(sk_truth_sets)
    hpe_split = split_train_test(sk_hpe, spec.test_fraction)
    truth_split = split_train_test(sk_truth, spec.test_fraction)
    return ExperimentData(
        ab_train=concat_datasets(ab_sets),
        sk_train=hpe_split.train,
        sk_test=truth_split.test,
        ab_validation=ab_validation,
        sk_validation=sk_validation,
        spec=spec,
        config=config,
        n_boundary_dropped=hpe_split.n_boundary_dropped,
    )


def _windows(rec: Recording, labels, config: TcnConfig, stride: int) -> WindowedDataset:
    return window_dataset(
        rec.imu,
        labels,
        window_len=config.window_len,
        stride=stride,
        population="SK" if rec.sk else "AB",
        speed_mps=rec.speed_mps,
        recording_id=rec.id,
    )


class AdaptedModels(NamedTuple):
    adapted: TcnModel
    sk_only: TcnModel
    sk_subset_size: int


def adapt_models(
    data: ExperimentData,
    base: TcnModel,
    sk_fraction: float,
    tcfg: TrainConfig,
) -> AdaptedModels:
    """Fine-tune on the AB+SK mix and train from scratch on the SK subset.

    The scratch model's batch size is clamped to the subset size so the
    smallest ratios remain trainable.
    """
    picked = sk_quota_indices(len(data.ab_train), data.sk_train, sk_fraction)
    sk_subset = data.sk_train.subset(picked)
    mixed = concat_datasets([data.ab_train, sk_subset])
    adapted, _ = fine_tune(base, mixed, tcfg)
    sk_tcfg = replace(tcfg, batch=min(tcfg.batch, len(sk_subset)))
    sk_only, _ = train(sk_subset, data.config, sk_tcfg)
    return AdaptedModels(adapted, sk_only, len(sk_subset))


class SweepPoint(NamedTuple):
    ratio: float
    adapted_rmse: float
    sk_only_rmse: float
    sk_items: int


def ratio_sweep(
    data: ExperimentData,
    ratios: list[float],
    base: TcnModel,
    tcfg: TrainConfig,
) -> list[SweepPoint]:
    """Adapted vs scratch stiff-knee error across mixing ratios."""
    points = []
    for ratio in ratios:
        models = adapt_models(data, base, ratio, tcfg)
        adapted_rep = evaluate_on_dataset(models.adapted, data.sk_test)
        sk_rep = evaluate_on_dataset(models.sk_only, data.sk_test)
        points.append(
            SweepPoint(ratio, adapted_rep.overall_mean, sk_rep.overall_mean, models.sk_subset_size)
        )
    return points


def evaluate_on_dataset(model: TcnModel, ds: WindowedDataset) -> EvalReport:
    preds = predict_dataset(model, ds)
    return rmse_report(preds, ds.targets)


def evaluate_on_recordings(
    model: TcnModel, recordings: list[Recording], stride: int
) -> EvalReport:
    """Pooled RMSE over validation recordings, with per-speed breakdown.

    Windows are built in chunks rather than materialized recording-wide.
    Speed labels come from each recording's speed profile: plateau
    segments by value, ramps pooled as "transient".
    """
    window_len = model.config.window_len
    preds = []
    truths = []
    labels = []
    for rec in recordings:
        t, x = imu_matrix(rec.imu)
        ends = np.arange(0, x.shape[1], stride)
        seg = rec.speed_profile.segments() if rec.speed_profile is not None else None
        for lo in range(0, len(ends), EVAL_CHUNK):
            chunk = ends[lo : lo + EVAL_CHUNK]
            wins = np.zeros((len(chunk), x.shape[0], window_len))
            for i, end in enumerate(chunk):
                src = x[:, max(end - window_len + 1, 0) : end + 1]
                wins[i, :, window_len - src.shape[1] :] = src
            preds.append(batch_forward(model, wins, "eval"))
        truths.append(np.array([rec.angles_truth[e].as_array() for e in ends]))
        if seg is not None:
            labels.extend(_segment_label(seg, float(t[e])) for e in ends)
        else:
            labels.extend(f"{rec.speed_mps:g}" for _ in ends)
    return rmse_report(np.concatenate(preds), np.concatenate(truths), labels)


def _segment_label(segments, t: float) -> str:
    for t0, t1, label in segments:
        if t0 <= t < t1:
            return label
    return segments[-1][2]


def experiment_matrix(
    models: dict[str, TcnModel], data: ExperimentData
) -> dict[str, EvalReport]:
    """The four model-to-subject pairings on the validation trial.

    ``models`` maps "AB", "SK", "AB+SK" to trained models; the result
    keys are "AB->AB", "AB->SK", "SK->SK", "AB+SK->SK".
    """
    stride = data.spec.stride_eval
    return {
        "AB->AB": evaluate_on_recordings(models["AB"], data.ab_validation, stride),
        "AB->SK": evaluate_on_recordings(models["AB"], data.sk_validation, stride),
        "SK->SK": evaluate_on_recordings(models["SK"], data.sk_validation, stride),
        "AB+SK->SK": evaluate_on_recordings(models["AB+SK"], data.sk_validation, stride),
    }
