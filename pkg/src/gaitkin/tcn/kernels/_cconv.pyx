# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled causal dilated convolution kernels.

Each kernel tap is one BLAS dgemm over a shifted time slice; slices of
C-contiguous (batch, channel, time) arrays have unit time stride and a
constant row stride, so nothing is packed or copied. Batch items are
spread over OpenMP threads (BLAS itself is pinned to one thread by the
backend selector, which is faster for these small products). Every
output element is owned by exactly one thread and tap order is fixed,
so results are bitwise reproducible for any thread count. ReLU can be
fused into the forward output while it is still cache-hot.
"""

import numpy as np

from cython.parallel cimport prange
from scipy.linalg.cython_blas cimport dgemm


cdef inline void _gemm_rm(char ta, char tb, int m, int n, int k,
                          double alpha, double* a, int lda,
                          double* b, int ldb, double beta,
                          double* c, int ldc) noexcept nogil:
    # row-major C(m,n) = alpha * op(A)(m,k) @ op(B)(k,n) + beta * C,
    # phrased as the column-major product of the transposed views
    dgemm(&tb, &ta, &n, &m, &k, &alpha, b, &ldb, a, &lda, &beta, c, &ldc)


def conv_forward(double[:, :, ::1] x, double[:, :, ::1] w, double[::1] bias,
                 int dilation, bint relu=False):
    """Causal dilated conv: y[b,o,t] = bias[o] + sum_{j,c} w[o,c,j] x[b,c,t-(K-1-j)*d].

    With ``relu`` the output is clamped at zero in place.
    """
    cdef int B = x.shape[0], Cin = x.shape[1], T = x.shape[2]
    cdef int Cout = w.shape[0], K = w.shape[2]
    y_arr = np.empty((B, Cout, T))
    y_arr[:] = np.asarray(bias)[None, :, None]
    taps_arr = np.ascontiguousarray(np.asarray(w).transpose(2, 0, 1))  # (K, Cout, Cin)
    cdef double[:, :, ::1] y = y_arr
    cdef double[:, :, ::1] taps = taps_arr
    cdef double* row
    cdef int j, bi, off, Tv, i
    for bi in prange(B, nogil=True, schedule="static"):
        for j in range(K):
            off = (K - 1 - j) * dilation
            Tv = T - off
            if Tv <= 0:
                continue
            _gemm_rm(b'N', b'N', Cout, Tv, Cin, 1.0,
                     &taps[j, 0, 0], Cin, &x[bi, 0, 0], T,
                     1.0, &y[bi, 0, off], T)
        if relu:
            row = &y[bi, 0, 0]
            for i in range(Cout * T):
                if row[i] < 0.0:
                    row[i] = 0.0
    return y_arr


def conv_backward(double[:, :, ::1] x, double[:, :, ::1] w, double[:, :, ::1] gy,
                  int dilation, bint need_gx=True):
    """Gradients of conv_forward: returns (gx, gw, gb); gx is None when skipped."""
    cdef int B = x.shape[0], Cin = x.shape[1], T = x.shape[2]
    cdef int Cout = w.shape[0], K = w.shape[2]
    gb_arr = np.asarray(gy).sum(axis=(0, 2))
    gx_arr = np.zeros((B, Cin, T)) if need_gx else None
    gw_taps_arr = np.zeros((K, Cout, Cin))
    taps_arr = np.ascontiguousarray(np.asarray(w).transpose(2, 0, 1))
    cdef double[:, :, ::1] gx = gx_arr if need_gx else None
    cdef double[:, :, ::1] gw_taps = gw_taps_arr
    cdef double[:, :, ::1] taps = taps_arr
    cdef int j, bi, off, Tv
    # weight grads: threads own distinct taps, batch accumulation order fixed
    for j in prange(K, nogil=True, schedule="static"):
        off = (K - 1 - j) * dilation
        Tv = T - off
        if Tv > 0:
            for bi in range(B):
                # gw_j += gy[bi][:, off:] @ x[bi][:, :Tv]^T
                _gemm_rm(b'N', b'T', Cout, Cin, Tv, 1.0,
                         &gy[bi, 0, off], T, &x[bi, 0, 0], T,
                         1.0, &gw_taps[j, 0, 0], Cin)
    if need_gx:
        # input grads: threads own distinct batch items
        for bi in prange(B, nogil=True, schedule="static"):
            for j in range(K):
                off = (K - 1 - j) * dilation
                Tv = T - off
                if Tv <= 0:
                    continue
                # gx[bi][:, :Tv] += w_j^T @ gy[bi][:, off:]
                _gemm_rm(b'T', b'N', Cin, Tv, Cout, 1.0,
                         &taps[j, 0, 0], Cin, &gy[bi, 0, off], T,
                         1.0, &gx[bi, 0, 0], T)
    gw_arr = np.ascontiguousarray(gw_taps_arr.transpose(1, 2, 0))
    return gx_arr, gw_arr, gb_arr
