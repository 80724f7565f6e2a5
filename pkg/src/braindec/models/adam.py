"""Adam optimizer over model parameter blocks.

Keeps first and second moment estimates per block and applies the standard
bias-corrected update in place. Works with any params object exposing
``blocks()`` (the MLP and LSTM containers both do), pairing gradient blocks
with parameter blocks by position.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def step(self, params, grads) -> None:
        """One in-place update; lazily initializes moments on first call."""
        pblocks = params.blocks()
        gblocks = grads.blocks()
        if len(pblocks) != len(gblocks):
            raise ValueError("parameter and gradient block counts differ")
        if not self.m:
            self.m = [np.zeros_like(arr) for _, arr in pblocks]
            self.v = [np.zeros_like(arr) for _, arr in pblocks]
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for i, ((_, p), (_, g)) in enumerate(zip(pblocks, gblocks)):
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * g
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * (g * g)
            m_hat = self.m[i] / bc1
            v_hat = self.v[i] / bc2
            p -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)
