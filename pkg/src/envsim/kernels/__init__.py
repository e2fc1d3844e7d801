from .conv import ConvGeometry, conv_forward, conv_backward, deconv_forward, deconv_backward
from .dense import dense_apply, dense_backward
from .activations import (
    RReluSpec,
    activation_apply,
    activation_backward,
    rrelu_forward,
    rrelu_backward,
    sigmoid_forward,
    sigmoid_backward,
    tanh_forward,
    tanh_backward,
)
from .gradcheck import finite_diff_check, finite_diff_check_tree

__all__ = [
    "ConvGeometry",
    "conv_forward",
    "conv_backward",
    "deconv_forward",
    "deconv_backward",
    "dense_apply",
    "dense_backward",
    "RReluSpec",
    "activation_apply",
    "activation_backward",
    "rrelu_forward",
    "rrelu_backward",
    "sigmoid_forward",
    "sigmoid_backward",
    "tanh_forward",
    "tanh_backward",
    "finite_diff_check",
    "finite_diff_check_tree",
]
