"""Sequence-kernel backends: compiled extension with a numpy fallback.

The recurrent sequence kernels (LSTM forward pass and backpropagation
through time) are the hot inner loop of training; everything else in the
package is BLAS-bound matrix arithmetic where numpy is already optimal.
Both backends implement the same two functions:

``lstm_seq_forward(x_proj, wh, h0, c0) -> (h_all, c_all, gates)``
    x_proj is the precomputed input projection plus bias, shape (T, B, 4H);
    wh the hidden-to-hidden weights (H, 4H); h0/c0 the initial state (B, H).
    Gate blocks are ordered (input, forget, cell-candidate, output); the
    returned gates array holds post-activation values for reuse in backward.

``lstm_seq_backward(dh_out, wh, gates, h_all, c_all, h0, c0)
   -> (dz_all, dh0, dc0)``
    dh_out carries the upstream gradient on every hidden state (T, B, H);
    dz_all is the gradient on the pre-activation gate stack (T, B, 4H), from
    which input/recurrent weight gradients are single matrix products.

Selection: the compiled module is used when importable; set
``BRAINDEC_BACKEND=python`` or ``BRAINDEC_BACKEND=native`` to force one.
"""

from __future__ import annotations

import os

import numpy as np


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def lstm_seq_forward_py(x_proj, wh, h0, c0):
    T, B, H4 = x_proj.shape
    H = H4 // 4
    h_all = np.empty((T, B, H))
    c_all = np.empty((T, B, H))
    gates = np.empty((T, B, H4))
    h, c = h0, c0
    for t in range(T):
        z = x_proj[t] + h @ wh
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = _sigmoid(z[:, 3 * H:])
        c = f * c + i * g
        h = o * np.tanh(c)
        gates[t, :, :H] = i
        gates[t, :, H:2 * H] = f
        gates[t, :, 2 * H:3 * H] = g
        gates[t, :, 3 * H:] = o
        h_all[t] = h
        c_all[t] = c
    return h_all, c_all, gates


def lstm_seq_backward_py(dh_out, wh, gates, h_all, c_all, h0, c0):
    T, B, H = dh_out.shape
    dz_all = np.empty((T, B, 4 * H))
    dh = np.zeros((B, H))
    dc = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        dh = dh + dh_out[t]
        i = gates[t, :, :H]
        f = gates[t, :, H:2 * H]
        g = gates[t, :, 2 * H:3 * H]
        o = gates[t, :, 3 * H:]
        c_prev = c_all[t - 1] if t > 0 else c0
        tc = np.tanh(c_all[t])
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        dz = dz_all[t]
        dz[:, :H] = dc * g * i * (1.0 - i)
        dz[:, H:2 * H] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * H:3 * H] = dc * i * (1.0 - g * g)
        dz[:, 3 * H:] = do * o * (1.0 - o)
        dh = dz @ wh.T
        dc = dc * f
    return dz_all, dh, dc


_FORCE = os.environ.get("BRAINDEC_BACKEND", "auto").lower()
try:
    from . import _native
except ImportError:
    _native = None

if _FORCE not in ("auto", "python", "native"):
    raise RuntimeError(f"BRAINDEC_BACKEND must be auto, python, or native, got {_FORCE!r}")
if _FORCE == "native" and _native is None:
    raise RuntimeError("BRAINDEC_BACKEND=native but the compiled kernels are not built")

if _native is not None and _FORCE != "python":
    ACTIVE_BACKEND = "native"
    lstm_seq_forward = _native.lstm_seq_forward
    lstm_seq_backward = _native.lstm_seq_backward
else:
    ACTIVE_BACKEND = "python"
    lstm_seq_forward = lstm_seq_forward_py
    lstm_seq_backward = lstm_seq_backward_py


def available_backends() -> list[str]:
    return ["python"] + (["native"] if _native is not None else [])


def get_kernels(backend: str):
    """(forward, backward) kernel pair for an explicit backend, for tests/benchmarks."""
    if backend == "python":
        return lstm_seq_forward_py, lstm_seq_backward_py
    if backend == "native":
        if _native is None:
            raise RuntimeError("compiled kernels are not built")
        return _native.lstm_seq_forward, _native.lstm_seq_backward
    raise ValueError(f"unknown backend {backend!r}")
