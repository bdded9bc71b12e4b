"""Dilated temporal convolutional network with analytic gradients."""

from gaitkin.tcn.config import TcnConfig, TrainConfig, receptive_field
from gaitkin.tcn.model import (
    NormStats,
    TcnModel,
    batch_forward,
    forward,
    init_model,
    loss_and_grad,
    weight_shapes,
)
from gaitkin.tcn.adam import AdamState, adam_step
from gaitkin.tcn.training import (
    EpochStats,
    dataset_mse,
    fine_tune,
    predict_dataset,
    train,
)
from gaitkin.tcn.serialize import FORMAT_VERSION, load_model, save_model
from gaitkin.tcn.kernels import BACKEND as KERNEL_BACKEND

__all__ = [
    "TcnConfig",
    "TrainConfig",
    "TcnModel",
    "NormStats",
    "AdamState",
    "EpochStats",
    "receptive_field",
    "init_model",
    "forward",
    "batch_forward",
    "loss_and_grad",
    "adam_step",
    "train",
    "fine_tune",
    "predict_dataset",
    "dataset_mse",
    "save_model",
    "load_model",
    "weight_shapes",
    "FORMAT_VERSION",
    "KERNEL_BACKEND",
]
