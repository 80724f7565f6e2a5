"""Stacked LSTM decoder over time x channel windows.

Standard LSTM recurrence per layer (sigmoid input/forget/output gates, tanh
cell candidate and cell output squashing), with gate blocks ordered
(input, forget, cell-candidate, output). The class head reads the top
layer's final hidden state by default, or its mean over time when
``readout="mean"``. The sequential recurrence and backpropagation through
time run through the selected backend kernels (see backends module).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..backends import lstm_seq_backward, lstm_seq_forward
from ..rng import SplitMix64
from .common import glorot_uniform, softmax

READOUT_LAST = "last"
READOUT_MEAN = "mean"
READOUTS = (READOUT_LAST, READOUT_MEAN)


@dataclass
class LstmLayer:
    """One recurrent layer: input, recurrent, and bias parameters ((.., 4H))."""

    wx: np.ndarray  # (input_size, 4H)
    wh: np.ndarray  # (H, 4H)
    b: np.ndarray   # (4H,)

    @property
    def hidden_size(self) -> int:
        return self.wh.shape[0]


@dataclass
class LstmParams:
    """Stacked layers plus the linear class head.

    Block order (also the checkpoint serialization order):
    layer0.wx, layer0.wh, layer0.b, layer1.wx, ..., head_w, head_b.
    """

    layers: tuple[LstmLayer, ...]
    head_w: np.ndarray  # (H, K)
    head_b: np.ndarray  # (K,)
    readout: str = READOUT_LAST

    def __post_init__(self):
        if self.readout not in READOUTS:
            raise ValueError(f"unknown readout {self.readout!r}")

    @property
    def input_size(self) -> int:
        return self.layers[0].wx.shape[0]

    @property
    def hidden_size(self) -> int:
        return self.layers[0].hidden_size

    @property
    def n_classes(self) -> int:
        return self.head_w.shape[1]

    def blocks(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for idx, layer in enumerate(self.layers):
            out.append((f"layer{idx}.wx", layer.wx))
            out.append((f"layer{idx}.wh", layer.wh))
            out.append((f"layer{idx}.b", layer.b))
        out.append(("head_w", self.head_w))
        out.append(("head_b", self.head_b))
        return out

    def copy(self) -> "LstmParams":
        layers = tuple(LstmLayer(l.wx.copy(), l.wh.copy(), l.b.copy())
                       for l in self.layers)
        return LstmParams(layers, self.head_w.copy(), self.head_b.copy(), self.readout)


def init_lstm(rng: SplitMix64, input_size: int, hidden_size: int = 128,
              n_layers: int = 2, n_classes: int = 3,
              readout: str = READOUT_LAST) -> LstmParams:
    """Glorot-uniform weights; zero biases except forget-gate biases at 1.0."""
    layers = []
    size_in = input_size
    for _ in range(n_layers):
        wx = glorot_uniform(rng, size_in, 4 * hidden_size)
        wh = glorot_uniform(rng, hidden_size, 4 * hidden_size)
        b = np.zeros(4 * hidden_size)
        b[hidden_size:2 * hidden_size] = 1.0  # forget gate, stabilizes early training
        layers.append(LstmLayer(wx, wh, b))
        size_in = hidden_size
    head_w = glorot_uniform(rng, hidden_size, n_classes)
    return LstmParams(tuple(layers), head_w, np.zeros(n_classes), readout)


def forward_batch(params: LstmParams, x: np.ndarray):
    """Probabilities (B, K) and the per-layer state cache for backward.

    x has shape (B, T, C).
    """
    if x.ndim != 3 or x.shape[2] != params.input_size:
        raise ValueError(f"input shape {x.shape} does not match input_size "
                         f"{params.input_size}")
    B, T, _ = x.shape
    H = params.hidden_size
    inp = np.ascontiguousarray(np.transpose(x, (1, 0, 2)))  # (T, B, C)
    h0 = np.zeros((B, H))
    c0 = np.zeros((B, H))
    layer_caches = []
    for layer in params.layers:
        size_in = layer.wx.shape[0]
        x_proj = (inp.reshape(T * B, size_in) @ layer.wx + layer.b).reshape(T, B, 4 * H)
        x_proj = np.ascontiguousarray(x_proj)
        h_all, c_all, gates = lstm_seq_forward(x_proj, layer.wh, h0, c0)
        layer_caches.append((inp, h_all, c_all, gates))
        inp = h_all
    top_h = layer_caches[-1][1]
    if params.readout == READOUT_LAST:
        h_read = top_h[-1]
    else:
        h_read = top_h.mean(axis=0)
    probs = softmax(h_read @ params.head_w + params.head_b)
    return probs, (layer_caches, h_read, h0, c0)


def forward(params: LstmParams, x: np.ndarray) -> np.ndarray:
    """Probability triple for a single (T, C) window."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected a (T, C) matrix, got shape {x.shape}")
    probs, _ = forward_batch(params, x[None, :, :])
    return probs[0]


def backward_batch(params: LstmParams, cache, dlogits: np.ndarray) -> LstmParams:
    """Gradients (as an LstmParams container) from the logit gradient."""
    layer_caches, h_read, h0, c0 = cache
    T = layer_caches[0][1].shape[0]
    B, H = h0.shape

    dhead_w = h_read.T @ dlogits
    dhead_b = dlogits.sum(axis=0)
    dh_read = dlogits @ params.head_w.T

    dh_out = np.zeros((T, B, H))
    if params.readout == READOUT_LAST:
        dh_out[-1] = dh_read
    else:
        dh_out[:] = dh_read / T

    grad_layers = []
    for layer, (inp, h_all, c_all, gates) in zip(
        reversed(params.layers), reversed(layer_caches)
    ):
        dz_all, _, _ = lstm_seq_backward(dh_out, layer.wh, gates, h_all, c_all, h0, c0)
        size_in = layer.wx.shape[0]
        dz_flat = dz_all.reshape(T * B, 4 * H)
        h_prev = np.concatenate([h0[None, :, :], h_all[:-1]], axis=0)
        dwx = inp.reshape(T * B, size_in).T @ dz_flat
        dwh = h_prev.reshape(T * B, H).T @ dz_flat
        db = dz_flat.sum(axis=0)
        grad_layers.append(LstmLayer(dwx, dwh, db))
        dh_out = (dz_flat @ layer.wx.T).reshape(T, B, size_in)
    grad_layers.reverse()
    return LstmParams(tuple(grad_layers), dhead_w, dhead_b, params.readout)
