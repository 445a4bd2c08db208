from .tensor import Tensor, NonFiniteError, concat, stack, no_grad
from .nn import (
    MlpParams,
    AttnParams,
    mlp_forward,
    softmax,
    log_softmax,
    layer_norm,
    ada_layer_norm,
    mha,
    dropout,
    xavier_uniform,
)
from .gradcheck import grad_check
from .optim import AdamW, cosine_lr

__all__ = [
    "Tensor", "NonFiniteError", "concat", "stack", "no_grad",
    "MlpParams", "AttnParams", "mlp_forward", "softmax", "log_softmax",
    "layer_norm", "ada_layer_norm", "mha", "dropout", "xavier_uniform",
    "grad_check", "AdamW", "cosine_lr",
]
