"""Shared pieces of the decoders: softmax head, soft-target losses, init draws.

Losses operate on probability outputs against soft probability targets.
Cross-entropy is the default training loss; mean squared error is available
as a config switch. Gradients are returned with respect to the pre-softmax
logits, already scaled for a batch mean.
"""

from __future__ import annotations

import numpy as np

from ..rng import SplitMix64

CROSS_ENTROPY = "cross_entropy"
MSE = "mse"
LOSSES = (CROSS_ENTROPY, MSE)

_LOG_CLAMP = 1e-12
_POS_CLAMP = 1e-300  # keeps softmax strictly positive even under underflow


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax; strictly positive, rows sum to 1."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=-1, keepdims=True)
    return np.maximum(p, _POS_CLAMP)


def soft_label_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Cross-entropy of one prediction against a soft target triple."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    return float(-(target * np.log(np.maximum(pred, _LOG_CLAMP))).sum())


def batch_loss(probs: np.ndarray, targets: np.ndarray, loss: str = CROSS_ENTROPY) -> np.ndarray:
    """Per-sample losses for a batch of probability rows."""
    if loss == CROSS_ENTROPY:
        return -(targets * np.log(np.maximum(probs, _LOG_CLAMP))).sum(axis=1)
    if loss == MSE:
        d = probs - targets
        return (d * d).sum(axis=1)
    raise ValueError(f"unknown loss {loss!r}")


def batch_loss_and_dlogits(
    probs: np.ndarray, targets: np.ndarray, loss: str = CROSS_ENTROPY
) -> tuple[float, np.ndarray]:
    """(mean loss, gradient of the mean loss w.r.t. the logits)."""
    n = probs.shape[0]
    losses = batch_loss(probs, targets, loss)
    if loss == CROSS_ENTROPY:
        # softmax + soft-target cross-entropy collapses to p - y
        dlogits = (probs - targets) / n
    else:
        dp = 2.0 * (probs - targets) / n
        inner = (dp * probs).sum(axis=1, keepdims=True)
        dlogits = probs * (dp - inner)
    return float(losses.sum() / n), dlogits


def glorot_uniform(rng: SplitMix64, fan_in: int, fan_out: int) -> np.ndarray:
    """Uniform(-limit, limit) weight matrix with limit = sqrt(6/(fan_in+fan_out)).

    Draws fan_in*fan_out uniforms from the stream in row-major order.
    """
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    u = rng.uniforms(fan_in * fan_out).reshape(fan_in, fan_out)
    return limit * (2.0 * u - 1.0)


def check_finite(name: str, array: np.ndarray) -> None:
    if not np.isfinite(array).all():
        raise FloatingPointError(f"non-finite values in parameter block {name!r}")
