"""Training loop: seeded init, per-epoch shuffles, Adam, best-val checkpointing.

A single 64-bit seed drives everything: parameter initialization consumes the
stream first, then each epoch's shuffle draws from the same stream, so a run
is fully determined by (dataset, config). The snapshot with the lowest
validation loss (strictly lower than any earlier epoch's) is kept as
best_params.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from ..epochs import TRAIN, VAL, Dataset, Epoch
from ..labels import argmax_class
from ..rng import SplitMix64
from . import lstm as lstm_mod
from . import mlp as mlp_mod
from .adam import AdamState
from .common import CROSS_ENTROPY, LOSSES, batch_loss, batch_loss_and_dlogits, check_finite
from .lstm import READOUT_LAST, READOUTS, LstmParams
from .mlp import MlpParams

log = logging.getLogger(__name__)

MLP = "mlp"
LSTM = "lstm"
ARCHITECTURES = (MLP, LSTM)

_EVAL_BATCH = 256


@dataclass
class TrainConfig:
    arch: str = MLP
    learning_rate: float = 1e-4
    batch_size: int = 32
    epochs: int = 200
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    hidden_size: int = 128
    n_layers: int = 2
    loss: str = CROSS_ENTROPY
    lstm_readout: str = READOUT_LAST

    def __post_init__(self):
        if self.arch not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.arch!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.lstm_readout not in READOUTS:
            raise ValueError(f"unknown readout {self.lstm_readout!r}")


@dataclass
class TrainResult:
    best_params: object
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    seed: int = 0
    epochs_run: int = 0
    n_steps: int = 0
    best_epoch: int = 0
    best_val_loss: float = float("inf")


def _inputs(epochs: list[Epoch], arch: str) -> np.ndarray:
    """Stacked model inputs: (n, T*C) for the MLP, (n, T, C) for the LSTM."""
    data = np.stack([ep.data for ep in epochs])
    if arch == MLP:
        return data.reshape(data.shape[0], -1)
    return data


def _targets(epochs: list[Epoch]) -> np.ndarray:
    return np.stack([np.asarray(ep.label.probs) for ep in epochs])


def _arch_of(params) -> str:
    if isinstance(params, MlpParams):
        return MLP
    if isinstance(params, LstmParams):
        return LSTM
    raise TypeError(f"unknown parameter container {type(params).__name__}")


def _forward_module(params):
    return mlp_mod if isinstance(params, MlpParams) else lstm_mod


def evaluate_loss(params, x: np.ndarray, y: np.ndarray, loss: str = CROSS_ENTROPY) -> float:
    """Mean per-sample loss over a stacked input array, evaluated in chunks."""
    mod = _forward_module(params)
    total = 0.0
    for start in range(0, x.shape[0], _EVAL_BATCH):
        probs, _ = mod.forward_batch(params, x[start:start + _EVAL_BATCH])
        total += float(batch_loss(probs, y[start:start + _EVAL_BATCH], loss).sum())
    return total / x.shape[0]


def train(ds: Dataset, cfg: TrainConfig) -> TrainResult:
    """Train one model on the dataset's train split, selecting on val loss."""
    train_eps = ds.split_epochs(TRAIN)
    val_eps = ds.split_epochs(VAL)
    if not train_eps:
        raise ValueError("empty train split")
    if not val_eps:
        raise ValueError("empty val split")

    x_train = _inputs(train_eps, cfg.arch)
    y_train = _targets(train_eps)
    x_val = _inputs(val_eps, cfg.arch)
    y_val = _targets(val_eps)
    n_train = x_train.shape[0]

    rng = SplitMix64(cfg.seed)
    if cfg.arch == MLP:
        params = mlp_mod.init_mlp(rng, x_train.shape[1], cfg.hidden_size)
    else:
        params = lstm_mod.init_lstm(rng, x_train.shape[2], cfg.hidden_size,
                                    cfg.n_layers, readout=cfg.lstm_readout)
    mod = _forward_module(params)
    opt = AdamState(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)

    result = TrainResult(best_params=params.copy(), seed=cfg.seed)
    order = list(range(n_train))
    for epoch in range(1, cfg.epochs + 1):
        rng.shuffle(order)
        loss_sum = 0.0
        for start in range(0, n_train, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            xb = x_train[idx]
            yb = y_train[idx]
            probs, cache = mod.forward_batch(params, xb)
            mean_loss, dlogits = batch_loss_and_dlogits(probs, yb, cfg.loss)
            grads = mod.backward_batch(params, cache, dlogits)
            for name, block in grads.blocks():
                check_finite(name, block)
            opt.step(params, grads)
            loss_sum += mean_loss * len(idx)
            result.n_steps += 1
        train_loss = loss_sum / n_train
        val_loss = evaluate_loss(params, x_val, y_val, cfg.loss)
        result.train_losses.append(train_loss)
        result.val_losses.append(val_loss)
        result.epochs_run = epoch
        if val_loss < result.best_val_loss:
            result.best_val_loss = val_loss
            result.best_epoch = epoch
            result.best_params = params.copy()
        log.debug("epoch %d: train loss %.6f, val loss %.6f", epoch, train_loss, val_loss)
    return result


def predict(params, epochs: list[Epoch]) -> list[tuple[tuple[float, float, float], int]]:
    """(probability triple, argmax class) per epoch, in input order."""
    if not epochs:
        return []
    mod = _forward_module(params)
    x = _inputs(epochs, _arch_of(params))
    out = []
    for start in range(0, x.shape[0], _EVAL_BATCH):
        probs, _ = mod.forward_batch(params, x[start:start + _EVAL_BATCH])
        for row in probs:
            triple = (float(row[0]), float(row[1]), float(row[2]))
            out.append((triple, argmax_class(triple)))
    return out


def write_loss_curves(path, result: TrainResult) -> None:
    """CSV `epoch,train_loss,val_loss`, one row per training epoch."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_loss"])
        for i, (tr, va) in enumerate(zip(result.train_losses, result.val_losses), start=1):
            writer.writerow([i, repr(tr), repr(va)])
