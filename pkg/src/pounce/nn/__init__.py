from .tensor import (Tensor, as_tensor, concat, log_softmax, maximum, minimum,
                     no_grad, softmax, straight_through, where)
from .layers import (ACTIVATIONS, Conv1d, Conv2d, Linear, LSTMCell, MLP,
                     Module, circular_pad1d, orthogonal)
from .heads import CategoricalHead, GaussianHead
from .optim import Adam

__all__ = [
    "Tensor", "as_tensor", "concat", "log_softmax", "maximum", "minimum",
    "no_grad", "softmax", "straight_through", "where",
    "ACTIVATIONS", "Conv1d", "Conv2d", "Linear", "LSTMCell", "MLP",
    "Module", "circular_pad1d", "orthogonal",
    "CategoricalHead", "GaussianHead", "Adam",
]
