"""Versioned binary checkpoints for trained decoders.

Layout (all little-endian):

    4 bytes   magic ``MPR1``
    u32       format version (currently 1)
    4 bytes   architecture tag, ``MLP `` or ``LSTM``
    u32 list  dimension header (see below)
    f64 list  parameter blocks, concatenated in ``blocks()`` order

Dimension headers:

    MLP:  input_dim, hidden_dim, n_classes
    LSTM: input_size, hidden_size, n_layers, n_classes, readout code
          (0 = last-step readout, 1 = mean-over-time)

Files round-trip byte-identically: save(load(path)) reproduces path exactly.
"""

from __future__ import annotations

import struct

import numpy as np

from .lstm import READOUT_LAST, READOUT_MEAN, LstmLayer, LstmParams
from .mlp import MlpParams

CHECKPOINT_MAGIC = b"MPR1"
CHECKPOINT_VERSION = 1
_TAG_MLP = b"MLP "
_TAG_LSTM = b"LSTM"
_READOUT_CODES = {READOUT_LAST: 0, READOUT_MEAN: 1}
_READOUT_NAMES = {code: name for name, code in _READOUT_CODES.items()}


class CheckpointError(ValueError):
    """Raised for malformed or truncated checkpoint files."""


def _pack_blocks(params) -> bytes:
    return b"".join(
        np.ascontiguousarray(arr, dtype="<f8").tobytes() for _, arr in params.blocks()
    )


def save_checkpoint(path, params) -> None:
    if isinstance(params, MlpParams):
        header = struct.pack(
            "<4sI4sIII", CHECKPOINT_MAGIC, CHECKPOINT_VERSION, _TAG_MLP,
            params.input_dim, params.hidden_dim, params.n_classes,
        )
    elif isinstance(params, LstmParams):
        header = struct.pack(
            "<4sI4sIIIII", CHECKPOINT_MAGIC, CHECKPOINT_VERSION, _TAG_LSTM,
            params.input_size, params.hidden_size, len(params.layers),
            params.n_classes, _READOUT_CODES[params.readout],
        )
    else:
        raise TypeError(f"unknown parameter container {type(params).__name__}")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(_pack_blocks(params))


def _take(buf: memoryview, offset: int, shape: tuple[int, ...]) -> tuple[np.ndarray, int]:
    count = int(np.prod(shape, dtype=np.int64)) if shape else 1
    nbytes = 8 * count
    if offset + nbytes > len(buf):
        raise CheckpointError("checkpoint truncated inside a parameter block")
    arr = np.frombuffer(buf, dtype="<f8", count=count, offset=offset)
    return arr.astype(np.float64).reshape(shape), offset + nbytes


def load_checkpoint(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 12:
        raise CheckpointError("checkpoint shorter than its fixed header")
    magic, version, tag = struct.unpack_from("<4sI4s", raw, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"bad magic {magic!r}, expected {CHECKPOINT_MAGIC!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    buf = memoryview(raw)

    if tag == _TAG_MLP:
        if len(raw) < 24:
            raise CheckpointError("checkpoint truncated inside the dimension header")
        input_dim, hidden_dim, n_classes = struct.unpack_from("<III", raw, 12)
        offset = 24
        w1, offset = _take(buf, offset, (input_dim, hidden_dim))
        b1, offset = _take(buf, offset, (hidden_dim,))
        w2, offset = _take(buf, offset, (hidden_dim, hidden_dim))
        b2, offset = _take(buf, offset, (hidden_dim,))
        w3, offset = _take(buf, offset, (hidden_dim, n_classes))
        b3, offset = _take(buf, offset, (n_classes,))
        params = MlpParams(w1, b1, w2, b2, w3, b3)
    elif tag == _TAG_LSTM:
        if len(raw) < 32:
            raise CheckpointError("checkpoint truncated inside the dimension header")
        input_size, hidden, n_layers, n_classes, readout_code = struct.unpack_from(
            "<IIIII", raw, 12)
        if readout_code not in _READOUT_NAMES:
            raise CheckpointError(f"unknown readout code {readout_code}")
        offset = 32
        layers = []
        size_in = input_size
        for _ in range(n_layers):
            wx, offset = _take(buf, offset, (size_in, 4 * hidden))
            wh, offset = _take(buf, offset, (hidden, 4 * hidden))
            b, offset = _take(buf, offset, (4 * hidden,))
            layers.append(LstmLayer(wx, wh, b))
            size_in = hidden
        head_w, offset = _take(buf, offset, (hidden, n_classes))
        head_b, offset = _take(buf, offset, (n_classes,))
        params = LstmParams(tuple(layers), head_w, head_b, _READOUT_NAMES[readout_code])
    else:
        raise CheckpointError(f"unknown architecture tag {tag!r}")

    if offset != len(raw):
        raise CheckpointError(
            f"trailing bytes: expected {offset} total, found {len(raw)}")
    return params
