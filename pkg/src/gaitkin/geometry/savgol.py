"""Savitzky-Golay smoothing as an explicit least-squares polynomial fit.

The filter weights are rows of the hat matrix H = A (A'A)^-1 A', where A
is the window x (order+1) Vandermonde matrix in sample offsets. Interior
samples use the centered row; near the edges the fit window stays inside
the series and the evaluation point shifts off-center, so no data is
invented and the output keeps the input length.

Defaults are window 50 with a fourth-order polynomial. An even window has
no exact center; the centered row is taken at index window // 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gaitkin.errors import IllConditioned, SeriesTooShort

# condition-number ceiling for the (order+1) x (order+1) normal equations
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class SavGolSpec:
    window: int = 50
    order: int = 4

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("polynomial order must be >= 0")
        if self.window < self.order + 1:
            raise ValueError(
                f"window {self.window} too small for order {self.order} (need >= order + 1)"
            )

    @property
    def center(self) -> int:
        return self.window // 2


def savgol_coefficients(spec: SavGolSpec, center_index: int) -> np.ndarray:
    """Convolution weights evaluating the window fit at ``center_index``.

    Returns a length-``spec.window`` weight vector; weights sum to 1.
    """
    if not 0 <= center_index < spec.window:
        raise ValueError(f"center_index {center_index} outside [0, {spec.window})")
    a = _design_matrix(spec, center_index)
    ata = a.T @ a
    cond = float(np.linalg.cond(ata))
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise IllConditioned(cond)
    # row `center_index` of the hat matrix A (A'A)^-1 A'
    return a @ np.linalg.solve(ata, a[center_index])


def savgol_filter(series, spec: SavGolSpec = SavGolSpec()) -> np.ndarray:
    """Smooth a 1-D series, preserving its length.

    Interior samples use the centered weights; the first/last few use
    shifted-center weights over the first/last full window.
    """
    y = np.asarray(series, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    n = y.size
    w = spec.window
    if n < w:
        raise SeriesTooShort(f"series length {n} < window {w}")

    rows = _weight_rows(spec)
    c = spec.center
    out = np.empty(n)
    # centered region: window [t - c, t - c + w) fits inside the series
    lo, hi = c, n - (w - c)  # t in [lo, hi] uses the centered row
    out[lo : hi + 1] = np.convolve(y, rows[c][::-1], mode="valid")
    for t in range(lo):
        out[t] = rows[t] @ y[:w]
    for t in range(hi + 1, n):
        out[t] = rows[t - (n - w)] @ y[n - w :]
    return out


def _design_matrix(spec: SavGolSpec, center_index: int) -> np.ndarray:
    offsets = np.arange(spec.window, dtype=np.float64) - center_index
    # column scaling leaves the hat matrix unchanged but tames conditioning
    scale = max(1.0, float(np.abs(offsets).max()))
    return np.vander(offsets / scale, spec.order + 1, increasing=True)


def _weight_rows(spec: SavGolSpec) -> np.ndarray:
    """All shifted-center weight rows: row k evaluates the fit at offset k."""
    return np.vstack([savgol_coefficients(spec, k) for k in range(spec.window)])
