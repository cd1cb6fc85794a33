from .gradcheck import grad_check
from .optim import OptimizerState, optimizer_step, step_from_grads
from .rng import generator, truncated_normal
from .tensor import (
    Tape,
    Tensor,
    add,
    attention,
    backward,
    concat,
    conv3d,
    gelu,
    layer_norm,
    matmul,
    mean_,
    mul,
    relu,
    reshape,
    scale,
    softmax,
    sqrt,
    sub,
    sum_,
    swap_last,
    take,
    transpose,
)

__all__ = [
    "Tape",
    "Tensor",
    "add",
    "attention",
    "backward",
    "concat",
    "conv3d",
    "gelu",
    "generator",
    "grad_check",
    "layer_norm",
    "matmul",
    "mean_",
    "mul",
    "OptimizerState",
    "optimizer_step",
    "relu",
    "reshape",
    "scale",
    "softmax",
    "sqrt",
    "step_from_grads",
    "sub",
    "sum_",
    "swap_last",
    "take",
    "transpose",
    "truncated_normal",
]
