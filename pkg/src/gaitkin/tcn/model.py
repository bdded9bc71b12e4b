"""TCN model state, forward pass, and analytic gradients.

Weights live in an ordered dict keyed by declaration order:
``block{i}.conv1.w/.b``, ``block{i}.conv2.w/.b``, an unbiased 1x1
``block{i}.proj.w`` where the channel count changes, then ``fc.w/.b``.
Each block runs conv -> ReLU -> dropout twice, then adds the residual
(identity or projection). The readout maps the final time step's
features to the four joint angles.

Dropout is inverted (masks scaled by 1/(1-p)) so eval mode is the
identity and deterministic. All math is float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gaitkin.errors import NonFiniteInput, ShapeMismatch
from gaitkin.tcn.config import TcnConfig
from gaitkin.tcn.kernels import conv_backward, conv_forward

STD_FLOOR = 1e-8


@dataclass(frozen=True)
class NormStats:
    """Per-channel input mean and standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.ndim != 1 or mean.shape != std.shape:
            raise ShapeMismatch("norm mean/std must be equal-length vectors")
        if not (np.isfinite(mean).all() and np.isfinite(std).all()):
            raise ValueError("norm statistics must be finite")
        if (std <= 0).any():
            raise ValueError("norm std must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @classmethod
    def identity(cls, channels: int) -> "NormStats":
        return cls(mean=np.zeros(channels), std=np.ones(channels))

    @classmethod
    def fit(cls, windows: np.ndarray) -> "NormStats":
        """Fit over all values of a (n, channels, time) stack."""
        mean = windows.mean(axis=(0, 2))
        std = np.maximum(windows.std(axis=(0, 2)), STD_FLOOR)
        return cls(mean=mean, std=std)


@dataclass(frozen=True)
class TcnModel:
    config: TcnConfig
    weights: dict[str, np.ndarray]
    norm: NormStats

    def __post_init__(self):
        expected = weight_shapes(self.config)
        if list(self.weights.keys()) != list(expected.keys()):
            raise ShapeMismatch(
                f"weight names {list(self.weights)} do not match config declaration order"
            )
        for name, shape in expected.items():
            if self.weights[name].shape != shape:
                raise ShapeMismatch(f"{name}: expected shape {shape}, got {self.weights[name].shape}")
            if not np.isfinite(self.weights[name]).all():
                raise ValueError(f"{name}: weights must be finite")
        if self.norm.mean.shape[0] != self.config.in_channels:
            raise ShapeMismatch("norm channel count must equal in_channels")

    def copy_weights(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.weights.items()}


def block_channels(config: TcnConfig, block: int) -> tuple[int, int]:
    cin = config.in_channels if block == 0 else config.channels
    return cin, config.channels


def weight_shapes(config: TcnConfig) -> dict[str, tuple[int, ...]]:
    """Declaration order and shapes of every weight tensor."""
    shapes: dict[str, tuple[int, ...]] = {}
    for b in range(config.blocks):
        cin, cout = block_channels(config, b)
        shapes[f"block{b}.conv1.w"] = (cout, cin, config.kernel)
        shapes[f"block{b}.conv1.b"] = (cout,)
        shapes[f"block{b}.conv2.w"] = (cout, cout, config.kernel)
        shapes[f"block{b}.conv2.b"] = (cout,)
        if cin != cout:
            shapes[f"block{b}.proj.w"] = (cout, cin)
    shapes["fc.w"] = (config.out_dim, config.channels)
    shapes["fc.b"] = (config.out_dim,)
    return shapes


def init_model(config: TcnConfig, rng, norm: NormStats | None = None) -> TcnModel:
    """He-uniform (fan-in) weights, zero biases."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    weights: dict[str, np.ndarray] = {}
    for name, shape in weight_shapes(config).items():
        if name.endswith(".b"):
            weights[name] = np.zeros(shape)
        else:
            fan_in = int(np.prod(shape[1:]))
            limit = math.sqrt(6.0 / fan_in)
            weights[name] = rng.uniform(-limit, limit, size=shape)
    return TcnModel(
        config=config,
        weights=weights,
        norm=norm if norm is not None else NormStats.identity(config.in_channels),
    )


def _check_batch(model: TcnModel, windows: np.ndarray) -> np.ndarray:
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 3:
        raise ShapeMismatch(f"expected (batch, channels, time), got {windows.shape}")
    cfg = model.config
    if windows.shape[1] != cfg.in_channels or windows.shape[2] != cfg.window_len:
        raise ShapeMismatch(
            f"expected ({cfg.in_channels}, {cfg.window_len}) windows, "
            f"got {windows.shape[1:]}"
        )
    if not np.isfinite(windows).all():
        raise NonFiniteInput("window contains NaN or infinity")
    return windows


def _keep_mask(rng, shape, p: float) -> np.ndarray:
    """Boolean keep-mask for inverted dropout (float32 draw, cheaper)."""
    return rng.random(shape, dtype=np.float32) >= p


_ZERO_BIAS = np.zeros(4096)


def _proj_kernel(proj: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(proj[:, :, None])


def _run(model: TcnModel, windows: np.ndarray, mode: str, rng, keep_cache: bool):
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    cfg = model.config
    w = model.weights
    use_dropout = mode == "train" and cfg.dropout > 0.0
    if use_dropout and rng is None:
        raise ValueError("train-mode forward needs a seeded generator for dropout")
    inv_keep = 1.0 / (1.0 - cfg.dropout) if use_dropout else 1.0

    h = (windows - model.norm.mean[None, :, None]) / model.norm.std[None, :, None]
    cache = {"x_norm": h} if keep_cache else None
    blocks = []
    for b in range(cfg.blocks):
        cin, cout = block_channels(cfg, b)
        dil = cfg.dilation_per_block[b]
        inp = h
        # ReLU is fused into the conv; gradients use (activation > 0)
        a1 = conv_forward(inp, w[f"block{b}.conv1.w"], w[f"block{b}.conv1.b"], dil, True)
        if use_dropout:
            m1 = _keep_mask(rng, a1.shape, cfg.dropout)
            d1 = a1 * m1
            d1 *= inv_keep
        else:
            m1 = None
            d1 = a1
        a2 = conv_forward(d1, w[f"block{b}.conv2.w"], w[f"block{b}.conv2.b"], dil, True)
        if use_dropout:
            m2 = _keep_mask(rng, a2.shape, cfg.dropout)
            d2 = a2 * m2
            d2 *= inv_keep
        else:
            m2 = None
            d2 = a2
        if cin != cout:
            # 1x1 conv keeps per-item arithmetic identical for any batch
            # size, which the streaming/batch bitwise contract relies on
            res = conv_forward(inp, _proj_kernel(w[f"block{b}.proj.w"]), _ZERO_BIAS[:cout], 1)
        else:
            res = inp
        h = d2 + res
        if keep_cache:
            blocks.append({"inp": inp, "a1": a1, "m1": m1, "d1": d1, "a2": a2, "m2": m2})
    feat = h[:, :, -1]
    pred = np.stack([w["fc.w"] @ f for f in feat]) + w["fc.b"]
    if keep_cache:
        cache["blocks"] = blocks
        cache["feat"] = feat
        cache["h_shape"] = h.shape
    return pred, cache


def batch_forward(model: TcnModel, windows, mode: str = "eval", rng=None) -> np.ndarray:
    """(batch, out_dim) predictions for a stack of windows."""
    windows = _check_batch(model, windows)
    pred, _ = _run(model, windows, mode, rng, keep_cache=False)
    return pred


def forward(model: TcnModel, window, mode: str = "eval", rng=None) -> np.ndarray:
    """Predict the four joint angles for one (in_channels, window_len) window."""
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2:
        raise ShapeMismatch(f"expected (channels, time) window, got {window.shape}")
    return batch_forward(model, window[None], mode, rng)[0]


def loss_and_grad(model: TcnModel, batch, mode: str = "train", rng=None):
    """Mean squared error over a batch and its exact weight gradients.

    ``batch`` is a (windows, targets) pair with shapes (B, C, T) and
    (B, out_dim). Dropout masks are drawn once from ``rng``.
    """
    windows, targets = batch
    windows = _check_batch(model, windows)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != (windows.shape[0], model.config.out_dim):
        raise ShapeMismatch(f"targets shape {targets.shape} does not match batch")
    if windows.shape[0] == 0:
        raise ValueError("batch must be non-empty")

    cfg = model.config
    w = model.weights
    pred, cache = _run(model, windows, mode, rng, keep_cache=True)
    err = pred - targets
    loss = float(np.mean(err**2))
    use_dropout = mode == "train" and cfg.dropout > 0.0
    inv_keep = 1.0 / (1.0 - cfg.dropout) if use_dropout else 1.0

    grads: dict[str, np.ndarray] = {}
    gpred = 2.0 * err / err.size
    grads["fc.w"] = gpred.T @ cache["feat"]
    grads["fc.b"] = gpred.sum(axis=0)
    gh = np.zeros(cache["h_shape"])
    gh[:, :, -1] = gpred @ w["fc.w"]

    for b in reversed(range(cfg.blocks)):
        cin, cout = block_channels(cfg, b)
        dil = cfg.dilation_per_block[b]
        c = cache["blocks"][b]
        first = b == 0  # the normalized input's gradient is never used
        if cin != cout:
            grads[f"block{b}.proj.w"] = np.tensordot(gh, c["inp"], axes=([0, 2], [0, 2]))
            ginp = (
                None
                if first
                else np.tensordot(w[f"block{b}.proj.w"], gh, axes=([0], [1])).transpose(1, 0, 2)
            )
        else:
            ginp = None if first else gh
        gz2 = gh * (c["a2"] > 0.0)
        if use_dropout:
            gz2 *= c["m2"]
            gz2 *= inv_keep
        gd1, gw2, gb2 = conv_backward(c["d1"], w[f"block{b}.conv2.w"], gz2, dil)
        grads[f"block{b}.conv2.w"] = gw2
        grads[f"block{b}.conv2.b"] = gb2
        np.multiply(gd1, c["a1"] > 0.0, out=gd1)
        if use_dropout:
            gd1 *= c["m1"]
            gd1 *= inv_keep
        ginp_branch, gw1, gb1 = conv_backward(
            c["inp"], w[f"block{b}.conv1.w"], gd1, dil, not first
        )
        grads[f"block{b}.conv1.w"] = gw1
        grads[f"block{b}.conv1.b"] = gb1
        if not first:
            np.add(ginp_branch, ginp, out=ginp_branch)
            gh = ginp_branch

    ordered = {name: grads[name] for name in model.weights}
    return loss, ordered
