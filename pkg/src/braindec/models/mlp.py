"""Feedforward decoder over flattened time x channel windows.

Two ReLU hidden layers of equal width and a softmax head regressing the
three class probabilities. Gradients are derived analytically; tests verify
every block against central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import SplitMix64
from .common import glorot_uniform, softmax


@dataclass
class MlpParams:
    """Weights for input -> hidden -> hidden -> class logits.

    Block order (also the checkpoint serialization order):
    w1, b1, w2, b2, w3, b3.
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def n_classes(self) -> int:
        return self.w3.shape[1]

    def blocks(self) -> list[tuple[str, np.ndarray]]:
        return [("w1", self.w1), ("b1", self.b1), ("w2", self.w2),
                ("b2", self.b2), ("w3", self.w3), ("b3", self.b3)]

    def copy(self) -> "MlpParams":
        return MlpParams(*(arr.copy() for _, arr in self.blocks()))


def init_mlp(rng: SplitMix64, input_dim: int, hidden_dim: int = 128,
             n_classes: int = 3) -> MlpParams:
    """Glorot-uniform weights, zero biases; draws in block order."""
    w1 = glorot_uniform(rng, input_dim, hidden_dim)
    w2 = glorot_uniform(rng, hidden_dim, hidden_dim)
    w3 = glorot_uniform(rng, hidden_dim, n_classes)
    return MlpParams(w1, np.zeros(hidden_dim), w2, np.zeros(hidden_dim),
                     w3, np.zeros(n_classes))


def forward_batch(params: MlpParams, x: np.ndarray):
    """Probabilities (B, K) and the activation cache for backward."""
    if x.ndim != 2 or x.shape[1] != params.input_dim:
        raise ValueError(f"input shape {x.shape} does not match input_dim "
                         f"{params.input_dim}")
    h1 = np.maximum(x @ params.w1 + params.b1, 0.0)
    h2 = np.maximum(h1 @ params.w2 + params.b2, 0.0)
    probs = softmax(h2 @ params.w3 + params.b3)
    return probs, (x, h1, h2)


def forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Probability triple for a single flattened window."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a flat vector, got shape {x.shape}")
    probs, _ = forward_batch(params, x[None, :])
    return probs[0]


def backward_batch(params: MlpParams, cache, dlogits: np.ndarray) -> MlpParams:
    """Gradients (as an MlpParams container) from the logit gradient."""
    x, h1, h2 = cache
    dw3 = h2.T @ dlogits
    db3 = dlogits.sum(axis=0)
    dh2 = (dlogits @ params.w3.T) * (h2 > 0)
    dw2 = h1.T @ dh2
    db2 = dh2.sum(axis=0)
    dh1 = (dh2 @ params.w2.T) * (h1 > 0)
    dw1 = x.T @ dh1
    db1 = dh1.sum(axis=0)
    return MlpParams(dw1, db1, dw2, db2, dw3, db3)
