"""Minimal sequential network library with reverse-mode gradients.

Dense, 1-D convolution, max pooling, batch normalization, LSTM, elementwise
activations, MSE loss, and Adam: enough to express every architecture used in
this project, in plain numpy with exact hand-written backward passes.
"""

from .layers import (
    LSTM,
    Activation,
    BatchNorm1D,
    Conv1D,
    Dense,
    Flatten,
    Layer,
    MaxPool1D,
)
from .losses import mse, mse_grad
from .network import Network
from .optim import Adam
from .gradcheck import gradient_check
from .checkpoint import (
    CheckpointError,
    load_checkpoint,
    save_network,
    save_tandem,
)

__all__ = [
    "Activation",
    "Adam",
    "BatchNorm1D",
    "CheckpointError",
    "Conv1D",
    "Dense",
    "Flatten",
    "LSTM",
    "Layer",
    "MaxPool1D",
    "Network",
    "gradient_check",
    "load_checkpoint",
    "mse",
    "mse_grad",
    "save_network",
    "save_tandem",
]
