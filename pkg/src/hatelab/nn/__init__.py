"""From-scratch neural layers on numpy with explicit backward passes.

Everything here is single-example: sequences are (length, dim) matrices,
feature vectors are 1-D. Minibatching is done by the caller accumulating
gradients across examples. Training runs in float32; gradient verification
builds the same layers in float64.
"""

from hatelab.nn.gradcheck import grad_check, numeric_grad, relative_error
from hatelab.nn.layers import (
    Conv1d,
    Dense,
    Dropout,
    MaxPool1d,
    conv_output_length,
    dropout_apply,
    softmax,
    softmax_xent,
)
from hatelab.nn.optim import Adam, AdamState, adam_step
from hatelab.nn.recurrent import BiLstm, Lstm, LstmParams

__all__ = [
    "Adam",
    "AdamState",
    "BiLstm",
    "Conv1d",
    "Dense",
    "Dropout",
    "Lstm",
    "LstmParams",
    "MaxPool1d",
    "adam_step",
    "conv_output_length",
    "dropout_apply",
    "grad_check",
    "numeric_grad",
    "relative_error",
    "softmax",
    "softmax_xent",
]
