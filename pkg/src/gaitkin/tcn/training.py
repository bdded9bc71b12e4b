"""Training loop: Adam on MSE with early stopping.

The validation split is the contiguous tail of each recording; input
normalization is fitted on the training split only. Training is
deterministic under the seed: one generator drives initialization,
epoch shuffling, and dropout in a fixed order. Early stopping restores
the best-validation weights.

Fine-tuning runs the same loop but starts from a pre-trained model and
keeps its normalization statistics (a few percent of new data is too
little to re-estimate them); every layer stays trainable.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from gaitkin.errors import ConfigMismatch, DatasetTooSmall, NonFiniteLoss
from gaitkin.pipeline.windowing import WindowedDataset, split_validation_tail
from gaitkin.tcn.adam import AdamState, adam_step
from gaitkin.tcn.config import TcnConfig, TrainConfig
from gaitkin.tcn.kernels import BACKEND  # noqa: F401  (re-exported for manifests)
from gaitkin.tcn.model import NormStats, TcnModel, batch_forward, init_model, loss_and_grad

EVAL_CHUNK = 256


class EpochStats(NamedTuple):
    epoch: int
    train_mse: float
    val_mse: float


def train(
    dataset: WindowedDataset,
    config: TcnConfig,
    tcfg: TrainConfig = TrainConfig(),
) -> tuple[TcnModel, list[EpochStats]]:
    """Train from scratch; returns the best-validation model and history."""
    return _fit(dataset, config, tcfg, base=None)


def fine_tune(
    base: TcnModel,
    mixed: WindowedDataset,
    tcfg: TrainConfig = TrainConfig(),
) -> tuple[TcnModel, list[EpochStats]]:
    """Continue training from ``base`` on a mixed dataset."""
    if mixed.windows.shape[1] != base.config.in_channels:
        raise ConfigMismatch(
            f"dataset has {mixed.windows.shape[1]} channels, model expects "
            f"{base.config.in_channels}"
        )
    if mixed.window_len != base.config.window_len:
        raise ConfigMismatch(
            f"dataset window_len {mixed.window_len} != model window_len "
            f"{base.config.window_len}"
        )
    return _fit(mixed, base.config, tcfg, base=base)


def _fit(dataset, config, tcfg, base):
    if len(dataset) < tcfg.batch:
        raise DatasetTooSmall(f"{len(dataset)} items < batch size {tcfg.batch}")
    if dataset.windows.shape[1] != config.in_channels or dataset.window_len != config.window_len:
        raise ConfigMismatch(
            f"dataset shape {dataset.windows.shape[1:]} does not match config "
            f"({config.in_channels}, {config.window_len})"
        )
    train_ds, val_ds = split_validation_tail(dataset, tcfg.val_fraction)

    rng = np.random.default_rng(tcfg.seed)
    if base is None:
        norm = NormStats.fit(train_ds.windows)
        model = init_model(config, rng, norm=norm)
    else:
        model = TcnModel(config=config, weights=base.copy_weights(), norm=base.norm)
    weights = model.weights
    state = AdamState.for_weights(weights)

    best_val = np.inf
    best_weights = model.copy_weights()
    stale = 0
    history: list[EpochStats] = []
    for epoch in range(1, tcfg.max_epochs + 1):
        order = rng.permutation(len(train_ds))
        total = 0.0
        for start in range(0, len(order), tcfg.batch):
            idx = order[start : start + tcfg.batch]
            loss, grads = loss_and_grad(
                model, (train_ds.windows[idx], train_ds.targets[idx]), "train", rng
            )
            if not np.isfinite(loss):
                raise NonFiniteLoss(epoch)
            adam_step(weights, grads, state, tcfg.lr)
            total += loss * len(idx)
        train_mse = total / len(order)
        val_mse = dataset_mse(model, val_ds)
        if not np.isfinite(val_mse):
            raise NonFiniteLoss(epoch)
        history.append(EpochStats(epoch, train_mse, val_mse))
        if val_mse < best_val - tcfg.min_delta:
            best_val = val_mse
            best_weights = model.copy_weights()
            stale = 0
        else:
            stale += 1
            if stale >= tcfg.patience:
                break
    return TcnModel(config=config, weights=best_weights, norm=model.norm), history


def predict_dataset(model: TcnModel, ds: WindowedDataset) -> np.ndarray:
    """Eval-mode predictions for every item, chunked to bound memory."""
    out = np.empty((len(ds), model.config.out_dim))
    for start in range(0, len(ds), EVAL_CHUNK):
        chunk = slice(start, min(start + EVAL_CHUNK, len(ds)))
        out[chunk] = batch_forward(model, ds.windows[chunk], "eval")
    return out


def dataset_mse(model: TcnModel, ds: WindowedDataset) -> float:
    preds = predict_dataset(model, ds)
    return float(np.mean((preds - ds.targets) ** 2))
