"""Kernel backend benchmark: compiled extension vs numpy fallback.

Times the causal dilated convolution forward/backward on the two
shapes that matter in practice: a training batch and a single
streaming window, plus a whole-model forward and training step.
Each backend runs under its preferred BLAS threading (the compiled
kernels pin BLAS to one thread and parallelize over batch items;
the numpy backend lets BLAS thread freely).
"""

from __future__ import annotations

import time

import numpy as np

from gaitkin.tcn import TcnConfig, init_model, loss_and_grad
from gaitkin.tcn.kernels import available_backends
from gaitkin.tcn.model import batch_forward


def _time(fn, repeats: int) -> float:
    fn()
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats * 1000.0


def _blas_threads(n: int):
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=n, user_api="blas")
    except ImportError:  # pragma: no cover
        import contextlib

        return contextlib.nullcontext()


def run_benchmark(repeats: int = 20) -> dict[str, dict[str, float]]:
    rng = np.random.default_rng(0)
    cfg = TcnConfig()
    w = rng.standard_normal((cfg.channels, cfg.channels, cfg.kernel))
    b = rng.standard_normal(cfg.channels)
    x_batch = rng.standard_normal((32, cfg.channels, cfg.window_len))
    gy = rng.standard_normal((32, cfg.channels, cfg.window_len))
    x_one = rng.standard_normal((1, cfg.channels, cfg.window_len))

    results: dict[str, dict[str, float]] = {}
    backends = available_backends()
    for name, mod in backends.items():
        with _blas_threads(1 if name == "cython" else None):
            r = {
                "conv_fwd_b32_ms": _time(lambda: mod.conv_forward(x_batch, w, b, 4), repeats),
                "conv_bwd_b32_ms": _time(lambda: mod.conv_backward(x_batch, w, gy, 4), repeats),
                "conv_fwd_b1_ms": _time(lambda: mod.conv_forward(x_one, w, b, 4), repeats * 5),
            }
        results[name] = r

    # whole-model timings under the currently selected backend
    model = init_model(cfg, np.random.default_rng(1))
    wins = rng.standard_normal((32, cfg.in_channels, cfg.window_len))
    tg = rng.standard_normal((32, cfg.out_dim))
    results["model (selected backend)"] = {
        "forward_b32_ms": _time(lambda: batch_forward(model, wins, "eval"), max(3, repeats // 4)),
        "train_step_b32_ms": _time(
            lambda: loss_and_grad(model, (wins, tg), "train", np.random.default_rng(2)),
            max(3, repeats // 4),
        ),
        "forward_b1_ms": _time(
            lambda: batch_forward(model, wins[:1], "eval"), repeats * 5
        ),
    }

    width = max(len(k) for r in results.values() for k in r)
    for name, r in results.items():
        print(f"[{name}]")
        for key, val in r.items():
            print(f"  {key.ljust(width)}  {val:8.3f}")
    if "cython" in results and "numpy" in results:
        f = results["numpy"]["conv_fwd_b32_ms"] / results["cython"]["conv_fwd_b32_ms"]
        bwd = results["numpy"]["conv_bwd_b32_ms"] / results["cython"]["conv_bwd_b32_ms"]
        print(f"speedup (compiled vs numpy): fwd {f:.1f}x, bwd {bwd:.1f}x")
    return results
