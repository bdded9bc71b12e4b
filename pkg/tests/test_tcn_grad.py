"""Analytic gradients against central finite differences.

Finite differences at h = 1e-4 straddle ReLU kinks whenever some
pre-activation sits within ~h of zero, which is statistically routine
when sweeping every parameter; those mismatches indict the test point,
not the gradients. The audit therefore conditions each random test
point on a safe kink margin: every pre-activation stays at least 100x
the perturbation reach away from zero.
"""

import numpy as np
import pytest

from gaitkin.tcn import TcnConfig, init_model, loss_and_grad
from gaitkin.tcn.kernels import conv_forward

FD_H = 1e-4
SAFE_MARGIN = 1e-2


def fd_check(model, wins, targets, rng_seed, tol=1e-4):
    """Max relative error of every parameter's gradient vs central differences."""
    _, grads = loss_and_grad(model, (wins, targets), "train", np.random.default_rng(rng_seed))
    worst = 0.0
    for name, g in grads.items():
        flat = model.weights[name].ravel()
        gflat = g.ravel()
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + FD_H
            lp, _ = loss_and_grad(model, (wins, targets), "train", np.random.default_rng(rng_seed))
            flat[k] = orig - FD_H
            lm, _ = loss_and_grad(model, (wins, targets), "train", np.random.default_rng(rng_seed))
            flat[k] = orig
            fd = (lp - lm) / (2 * FD_H)
            err = abs(fd - gflat[k])
            if err > 1e-7:
                err = err / max(abs(fd), abs(gflat[k]), 1e-12)
            else:
                err = 0.0
            worst = max(worst, err)
    return worst


def kink_margin(model, wins, rng_seed) -> float:
    """Smallest |pre-activation| across all conv layers for this input.

    Mirrors the forward pass (including the dropout mask draws) but
    keeps the raw pre-activations that the fused-ReLU path discards.
    """
    cfg = model.config
    w = model.weights
    rng = np.random.default_rng(rng_seed)
    use_dropout = cfg.dropout > 0.0
    inv = 1.0 / (1.0 - cfg.dropout) if use_dropout else 1.0
    h = (wins - model.norm.mean[None, :, None]) / model.norm.std[None, :, None]
    margin = np.inf
    for b in range(cfg.blocks):
        dil = cfg.dilation_per_block[b]
        inp = h
        z1 = conv_forward(inp, w[f"block{b}.conv1.w"], w[f"block{b}.conv1.b"], dil)
        margin = min(margin, float(np.abs(z1).min()))
        d1 = np.maximum(z1, 0.0)
        if use_dropout:
            d1 = d1 * (rng.random(d1.shape, dtype=np.float32) >= cfg.dropout) * inv
        z2 = conv_forward(d1, w[f"block{b}.conv2.w"], w[f"block{b}.conv2.b"], dil)
        margin = min(margin, float(np.abs(z2).min()))
        d2 = np.maximum(z2, 0.0)
        if use_dropout:
            d2 = d2 * (rng.random(d2.shape, dtype=np.float32) >= cfg.dropout) * inv
        key = f"block{b}.proj.w"
        res = np.tensordot(w[key], inp, axes=([1], [1])).transpose(1, 0, 2) if key in w else inp
        h = d2 + res
    return margin


def random_small_config(rng) -> TcnConfig:
    blocks = int(rng.integers(1, 3))
    kernel = int(rng.integers(1, 4))
    return TcnConfig(
        in_channels=int(rng.integers(2, 5)),
        blocks=blocks,
        channels=int(rng.integers(2, 6)),
        kernel=kernel,
        dropout=0.0,
        dilation_per_block=tuple(int(rng.integers(1, 4)) for _ in range(blocks)),
        out_dim=int(rng.integers(1, 4)),
        window_len=int(rng.integers(max(kernel, 8), 16)),
    )


def differentiable_point(cfg, rng, mask_seed):
    """Model + batch with all pre-activations clear of the ReLU kinks."""
    for _ in range(200):
        model = init_model(cfg, rng)
        for name, w in model.weights.items():
            if name.endswith(".b"):
                w += rng.normal(0.0, 0.1, size=w.shape)
        wins = rng.standard_normal((3, cfg.in_channels, cfg.window_len))
        targets = rng.standard_normal((3, cfg.out_dim))
        if kink_margin(model, wins, mask_seed) > SAFE_MARGIN:
            return model, wins, targets
    raise AssertionError("no kink-free test point found")


def test_gradients_on_5_random_configs():
    for seed in range(5):
        rng = np.random.default_rng(1000 + seed)
        cfg = random_small_config(rng)
        model, wins, targets = differentiable_point(cfg, rng, mask_seed=seed)
        worst = fd_check(model, wins, targets, rng_seed=seed)
        assert worst < 1e-4, f"config seed {seed}: worst rel err {worst:.3e}"


def test_gradients_with_dropout_masks_fixed():
    rng = np.random.default_rng(77)
    cfg = TcnConfig(
        in_channels=3, blocks=2, channels=4, kernel=3, dropout=0.3,
        dilation_per_block=(1, 2), out_dim=2, window_len=12,
    )
    model, wins, targets = differentiable_point(cfg, rng, mask_seed=5)
    assert fd_check(model, wins, targets, rng_seed=5) < 1e-4


def test_perfect_predictions_zero_loss_and_bias_grad():
    cfg = TcnConfig(
        in_channels=2, blocks=1, channels=3, kernel=2, dropout=0.0,
        dilation_per_block=(1,), out_dim=2, window_len=6,
    )
    model = init_model(cfg, np.random.default_rng(3))
    wins = np.random.default_rng(4).standard_normal((4, 2, 6))
    from gaitkin.tcn import batch_forward

    targets = batch_forward(model, wins)
    loss, grads = loss_and_grad(model, (wins, targets), "train", np.random.default_rng(0))
    assert loss == pytest.approx(0.0, abs=1e-24)
    np.testing.assert_allclose(grads["fc.b"], 0.0, atol=1e-12)


def test_fc_gradient_closed_form_single_sample():
    """FC-layer gradient equals 2 (pred - y) feat^T / out_dim for one sample."""
    cfg = TcnConfig(
        in_channels=2, blocks=1, channels=3, kernel=2, dropout=0.0,
        dilation_per_block=(1,), out_dim=4, window_len=5,
    )
    model = init_model(cfg, np.random.default_rng(6))
    rng = np.random.default_rng(7)
    win = rng.standard_normal((1, 2, 5))
    target = rng.standard_normal((1, 4))
    from gaitkin.tcn.model import _run

    pred, cache = _run(model, win, "eval", None, True)
    _, grads = loss_and_grad(model, (win, target), "train", np.random.default_rng(0))
    feat = cache["feat"][0]
    expected = 2.0 * np.outer(pred[0] - target[0], feat) / 4.0
    np.testing.assert_allclose(grads["fc.w"], expected, atol=1e-9)
    np.testing.assert_allclose(grads["fc.b"], 2.0 * (pred[0] - target[0]) / 4.0, atol=1e-9)


def test_loss_is_mean_over_batch_and_outputs():
    cfg = TcnConfig(
        in_channels=2, blocks=1, channels=3, kernel=2, dropout=0.0,
        dilation_per_block=(1,), out_dim=2, window_len=5,
    )
    model = init_model(cfg, np.random.default_rng(8))
    rng = np.random.default_rng(9)
    wins = rng.standard_normal((3, 2, 5))
    from gaitkin.tcn import batch_forward

    preds = batch_forward(model, wins)
    targets = preds + np.array([[1.0, -1.0], [2.0, 2.0], [0.0, 3.0]])
    loss, _ = loss_and_grad(model, (wins, targets), "train", np.random.default_rng(0))
    assert loss == pytest.approx((1 + 1 + 4 + 4 + 0 + 9) / 6.0, rel=1e-12)
