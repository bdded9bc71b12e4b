"""Convolution kernel backend selection.

The compiled extension is preferred when importable; otherwise the
numpy backend is used. GAITKIN_KERNELS=numpy|cython forces a choice
(forcing cython raises if the extension is missing).

The compiled kernels parallelize over batch items with OpenMP and issue
single-threaded BLAS calls, which measures faster on these small
per-tap products than letting BLAS thread internally; the BLAS pool is
pinned accordingly when that backend is selected.
"""

from __future__ import annotations

import os

from gaitkin.tcn.kernels import numpy_backend

_requested = os.environ.get("GAITKIN_KERNELS", "auto").lower()
if _requested not in ("auto", "numpy", "cython"):
    raise ValueError(f"GAITKIN_KERNELS must be auto|numpy|cython, got {_requested!r}")

BACKEND = "numpy"
_impl = numpy_backend
_blas_limit = None

if _requested in ("auto", "cython"):
    try:
        from gaitkin.tcn.kernels import _cconv

        BACKEND = "cython"
        _impl = _cconv
    except ImportError:
        if _requested == "cython":
            raise

if BACKEND == "cython":
    try:
        from threadpoolctl import threadpool_limits

        _blas_limit = threadpool_limits(limits=1, user_api="blas")
    except ImportError:
        pass

conv_forward = _impl.conv_forward
conv_backward = _impl.conv_backward


def available_backends() -> dict:
    """Importable backends by name, for benchmarks and tests."""
    out = {"numpy": numpy_backend}
    try:
        from gaitkin.tcn.kernels import _cconv as ext

        out["cython"] = ext
    except ImportError:
        pass
    return out
