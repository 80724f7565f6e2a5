"""From-scratch MLP and LSTM sentiment decoders with Adam training."""

from .adam import AdamState
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .common import CROSS_ENTROPY, LOSSES, MSE, soft_label_loss, softmax
from .lstm import LstmLayer, LstmParams, init_lstm
from .mlp import MlpParams, init_mlp
from .train import (
    ARCHITECTURES,
    LSTM,
    MLP,
    TrainConfig,
    TrainResult,
    evaluate_loss,
    predict,
    train,
    write_loss_curves,
)
from . import lstm, mlp

__all__ = [
    "ARCHITECTURES",
    "AdamState",
    "CROSS_ENTROPY",
    "CheckpointError",
    "LOSSES",
    "LSTM",
    "LstmLayer",
    "LstmParams",
    "MLP",
    "MSE",
    "MlpParams",
    "TrainConfig",
    "TrainResult",
    "evaluate_loss",
    "init_lstm",
    "init_mlp",
    "load_checkpoint",
    "lstm",
    "mlp",
    "predict",
    "save_checkpoint",
    "soft_label_loss",
    "softmax",
    "train",
    "write_loss_curves",
]
