"""Pure-numpy causal dilated convolution kernels.

Same contract and loop structure as the compiled backend: batch items
are processed independently with one matrix product per kernel tap, so
results do not depend on how items are batched (streaming one window at
a time matches batched evaluation bitwise). Used when the extension is
not built or when GAITKIN_KERNELS=numpy.
"""

from __future__ import annotations

import numpy as np


def conv_forward(
    x: np.ndarray, w: np.ndarray, bias: np.ndarray, dilation: int, relu: bool = False
) -> np.ndarray:
    """Causal dilated conv: y[b,o,t] = bias[o] + sum_{j,c} w[o,c,j] x[b,c,t-(K-1-j)*d]."""
    B, Cin, T = x.shape
    Cout, _, K = w.shape
    y = np.empty((B, Cout, T))
    y[:] = bias[None, :, None]
    taps = np.ascontiguousarray(w.transpose(2, 0, 1))  # (K, Cout, Cin)
    for bi in range(B):
        xb = x[bi]
        yb = y[bi]
        for j in range(K):
            off = (K - 1 - j) * dilation
            if off >= T:
                continue
            yb[:, off:] += taps[j] @ xb[:, : T - off]
    if relu:
        np.maximum(y, 0.0, out=y)
    return y


def conv_backward(
    x: np.ndarray, w: np.ndarray, gy: np.ndarray, dilation: int, need_gx: bool = True
) -> tuple[np.ndarray | None, np.ndarray, np.ndarray]:
    """Gradients of conv_forward: returns (gx, gw, gb); gx is None when skipped."""
    B, Cin, T = x.shape
    Cout, _, K = w.shape
    gb = gy.sum(axis=(0, 2))
    gx = np.zeros_like(x) if need_gx else None
    gw_taps = np.zeros((K, Cout, Cin))
    taps = np.ascontiguousarray(w.transpose(2, 0, 1))
    for bi in range(B):
        xb = x[bi]
        gyb = gy[bi]
        for j in range(K):
            off = (K - 1 - j) * dilation
            if off >= T:
                continue
            gw_taps[j] += gyb[:, off:] @ xb[:, : T - off].T
            if need_gx:
                gx[bi][:, : T - off] += taps[j].T @ gyb[:, off:]
    return gx, np.ascontiguousarray(gw_taps.transpose(1, 2, 0)), gb
