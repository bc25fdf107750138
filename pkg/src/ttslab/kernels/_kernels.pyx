# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: same-padded 1-D cross-correlation (forward and both
gradients) and Levenshtein distance. Semantics mirror ttslab.kernels.fallback.
"""

import numpy as np

cimport numpy as cnp

NAME = "compiled"


def conv1d_forward(double[:, ::1] x, double[:, :, ::1] w, int stride):
    cdef Py_ssize_t cin = x.shape[0], length = x.shape[1]
    cdef Py_ssize_t cout = w.shape[0], ksize = w.shape[2]
    cdef Py_ssize_t pad = (ksize - 1) // 2
    cdef Py_ssize_t lout = (length + stride - 1) // stride
    out_arr = np.zeros((cout, lout), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t co, ci, u, t, t_lo, t_hi, base
    cdef double wv
    with nogil:
        for co in range(cout):
            for ci in range(cin):
                for u in range(ksize):
                    wv = w[co, ci, u]
                    # t range keeping s = t*stride + u - pad inside [0, length)
                    t_lo = 0 if u >= pad else (pad - u + stride - 1) // stride
                    t_hi = (length + pad - u + stride - 1) // stride
                    if t_hi > lout:
                        t_hi = lout
                    base = u - pad
                    for t in range(t_lo, t_hi):
                        out[co, t] += wv * x[ci, t * stride + base]
    return out_arr


def conv1d_backward_input(double[:, ::1] grad, double[:, :, ::1] w,
                          int stride, Py_ssize_t length):
    cdef Py_ssize_t cout = grad.shape[0], lout = grad.shape[1]
    cdef Py_ssize_t cin = w.shape[1], ksize = w.shape[2]
    cdef Py_ssize_t pad = (ksize - 1) // 2
    dx_arr = np.zeros((cin, length), dtype=np.float64)
    cdef double[:, ::1] dx = dx_arr
    cdef Py_ssize_t co, ci, u, t, t_lo, t_hi, base
    cdef double wv
    with nogil:
        for ci in range(cin):
            for co in range(cout):
                for u in range(ksize):
                    wv = w[co, ci, u]
                    t_lo = 0 if u >= pad else (pad - u + stride - 1) // stride
                    t_hi = (length + pad - u + stride - 1) // stride
                    if t_hi > lout:
                        t_hi = lout
                    base = u - pad
                    for t in range(t_lo, t_hi):
                        dx[ci, t * stride + base] += wv * grad[co, t]
    return dx_arr


def conv1d_backward_weight(double[:, ::1] grad, double[:, ::1] x,
                           Py_ssize_t ksize, int stride):
    cdef Py_ssize_t cout = grad.shape[0], lout = grad.shape[1]
    cdef Py_ssize_t cin = x.shape[0], length = x.shape[1]
    cdef Py_ssize_t pad = (ksize - 1) // 2
    dw_arr = np.zeros((cout, cin, ksize), dtype=np.float64)
    cdef double[:, :, ::1] dw = dw_arr
    cdef Py_ssize_t co, ci, u, t, t_lo, t_hi, base
    cdef double acc
    with nogil:
        for co in range(cout):
            for ci in range(cin):
                for u in range(ksize):
                    t_lo = 0 if u >= pad else (pad - u + stride - 1) // stride
                    t_hi = (length + pad - u + stride - 1) // stride
                    if t_hi > lout:
                        t_hi = lout
                    base = u - pad
                    acc = 0.0
                    for t in range(t_lo, t_hi):
                        acc += grad[co, t] * x[ci, t * stride + base]
                    dw[co, ci, u] = acc
    return dw_arr


def levenshtein(long long[::1] a, long long[::1] b):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0]
    if n == 0:
        return m
    if m == 0:
        return n
    prev_arr = np.arange(m + 1, dtype=np.int64)
    cur_arr = np.zeros(m + 1, dtype=np.int64)
    cdef long long[::1] prev = prev_arr
    cdef long long[::1] cur = cur_arr
    cdef long long[::1] tmp
    cdef Py_ssize_t i, j
    cdef long long ai, sub, ins, dele, best
    with nogil:
        for i in range(1, n + 1):
            cur[0] = i
            ai = a[i - 1]
            for j in range(1, m + 1):
                sub = prev[j - 1] + (0 if ai == b[j - 1] else 1)
                ins = cur[j - 1] + 1
                dele = prev[j] + 1
                best = sub if sub < ins else ins
                cur[j] = best if best < dele else dele
            tmp = prev
            prev = cur
            cur = tmp
    return int(prev[m])
