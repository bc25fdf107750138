"""Numpy implementations of the hot kernels.

Selected at import time by :mod:`ttslab.kernels` when the compiled extension
is unavailable (or forced via ``TTSLAB_KERNELS=fallback``). Semantics are
identical to the Cython versions; floating-point results may differ in the
last bits because BLAS chooses its own summation order.
"""

import numpy as np

NAME = "fallback"


def conv1d_forward(x: np.ndarray, w: np.ndarray, stride: int) -> np.ndarray:
    """Cross-correlate x[Cin,L] with w[Cout,Cin,K], zero-padded 'same'.

    Output length is ceil(L/stride); output position t is centred on input
    position t*stride.
    """
    cin, length = x.shape
    cout, _, ksize = w.shape
    pad = (ksize - 1) // 2
    lout = -(-length // stride)
    xp = np.zeros((cin, length + 2 * pad), dtype=np.float64)
    xp[:, pad:pad + length] = x
    starts = np.arange(lout) * stride
    windows = np.lib.stride_tricks.sliding_window_view(xp, ksize, axis=1)
    cols = windows[:, starts, :]                       # [Cin, Lout, K]
    cols = cols.transpose(0, 2, 1).reshape(cin * ksize, lout)
    return w.reshape(cout, cin * ksize) @ cols


def conv1d_backward_input(grad: np.ndarray, w: np.ndarray, stride: int,
                          length: int) -> np.ndarray:
    """Gradient of conv1d_forward w.r.t. x, given grad[Cout,Lout]."""
    cout, lout = grad.shape
    _, cin, ksize = w.shape
    pad = (ksize - 1) // 2
    dx = np.zeros((cin, length), dtype=np.float64)
    t = np.arange(lout)
    for u in range(ksize):
        s = t * stride + u - pad
        valid = (s >= 0) & (s < length)
        if not valid.any():
            continue
        # target positions are distinct for fixed u, so fancy += is safe
        dx[:, s[valid]] += w[:, :, u].T @ grad[:, valid]
    return dx


def conv1d_backward_weight(grad: np.ndarray, x: np.ndarray, ksize: int,
                           stride: int) -> np.ndarray:
    """Gradient of conv1d_forward w.r.t. w, given grad[Cout,Lout]."""
    cout, lout = grad.shape
    cin, length = x.shape
    pad = (ksize - 1) // 2
    xp = np.zeros((cin, length + 2 * pad), dtype=np.float64)
    xp[:, pad:pad + length] = x
    starts = np.arange(lout) * stride
    dw = np.empty((cout, cin, ksize), dtype=np.float64)
    for u in range(ksize):
        dw[:, :, u] = grad @ xp[:, starts + u].T
    return dw


def levenshtein(a: np.ndarray, b: np.ndarray) -> int:
    """Edit distance with unit insert/delete/substitute costs."""
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = list(range(m + 1))
    cur = [0] * (m + 1)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            ins = cur[j - 1] + 1
            dele = prev[j] + 1
            best = sub if sub < ins else ins
            cur[j] = best if best < dele else dele
        prev, cur = cur, prev
    return prev[m]
