"""LSTM recurrence kernels.

The sequential forward/backward loops dominate training time, so they are
compiled with numba when available.  Set ``SOCCERSUM_NUMBA=0`` to force the
pure-numpy fallback (the same source functions, uncompiled); the two paths
agree to machine precision.  ``benchmarks/bench_kernels.py`` compares them.

Gate order in the stacked weight matrices is (input, forget, candidate,
output).  W has shape (4H, D), U has shape (4H, H), b has shape (4H,).
Initial hidden and cell states are zero.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False


def numba_enabled() -> bool:
    return HAS_NUMBA and os.environ.get("SOCCERSUM_NUMBA", "1") != "0"


def _lstm_forward(x, W, U, b):
    """Run an LSTM over x (T, D); returns (h, c, gates).

    h, c: (T, H) hidden and cell states.  gates: (T, 4H) post-activation
    gate values in (i, f, g, o) order, cached for the backward pass.
    """
    T = x.shape[0]
    H = U.shape[1]
    h = np.zeros((T, H))
    c = np.zeros((T, H))
    gates = np.zeros((T, 4 * H))
    h_prev = np.zeros(H)
    c_prev = np.zeros(H)
    for t in range(T):
        z = np.dot(W, x[t]) + np.dot(U, h_prev) + b
        i_g = 1.0 / (1.0 + np.exp(-z[:H]))
        f_g = 1.0 / (1.0 + np.exp(-z[H : 2 * H]))
        g_g = np.tanh(z[2 * H : 3 * H])
        o_g = 1.0 / (1.0 + np.exp(-z[3 * H :]))
        c_t = f_g * c_prev + i_g * g_g
        h[t] = o_g * np.tanh(c_t)
        c[t] = c_t
        gates[t, :H] = i_g
        gates[t, H : 2 * H] = f_g
        gates[t, 2 * H : 3 * H] = g_g
        gates[t, 3 * H :] = o_g
        h_prev = h[t]
        c_prev = c_t
    return h, c, gates


def _lstm_backward(x, h, c, gates, W, U, dh_ext):
    """Backward pass matching _lstm_forward.

    dh_ext: (T, H) gradient flowing into each hidden state from outside the
    recurrence (zeros where a state feeds nothing but the next step).
    Returns (dx, dW, dU, db).
    """
    T = x.shape[0]
    H = U.shape[1]
    D = W.shape[1]
    dx = np.zeros((T, D))
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * H)
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)
    dz = np.zeros(4 * H)
    zeros_h = np.zeros(H)
    for t in range(T - 1, -1, -1):
        if t > 0:
            c_prev = c[t - 1]
            h_prev = h[t - 1]
        else:
            c_prev = zeros_h
            h_prev = zeros_h
        i_g = gates[t, :H]
        f_g = gates[t, H : 2 * H]
        g_g = gates[t, 2 * H : 3 * H]
        o_g = gates[t, 3 * H :]
        tc = np.tanh(c[t])
        dh = dh_ext[t] + dh_next
        do = dh * tc
        dc = dc_next + dh * o_g * (1.0 - tc * tc)
        di = dc * g_g
        dg = dc * i_g
        df = dc * c_prev
        dz[:H] = di * i_g * (1.0 - i_g)
        dz[H : 2 * H] = df * f_g * (1.0 - f_g)
        dz[2 * H : 3 * H] = dg * (1.0 - g_g * g_g)
        dz[3 * H :] = do * o_g * (1.0 - o_g)
        dW += np.outer(dz, x[t])
        dU += np.outer(dz, h_prev)
        db += dz
        dx[t] = np.dot(W.T, dz)
        dh_next = np.dot(U.T, dz)
        dc_next = dc * f_g
    return dx, dW, dU, db


# Pure-numpy references stay importable under these names on every path.
lstm_forward_numpy = _lstm_forward
lstm_backward_numpy = _lstm_backward

if HAS_NUMBA:
    lstm_forward_numba = numba.njit(cache=True)(_lstm_forward)
    lstm_backward_numba = numba.njit(cache=True)(_lstm_backward)
else:  # pragma: no cover
    lstm_forward_numba = None
    lstm_backward_numba = None

if numba_enabled():
    lstm_forward = lstm_forward_numba
    lstm_backward = lstm_backward_numba
else:
    lstm_forward = lstm_forward_numpy
    lstm_backward = lstm_backward_numpy
