"""Finite-difference verification of tape gradients."""

from __future__ import annotations

import numpy as np

from .tensor import Tape, Tensor, backward


def grad_check(f, inputs: list[Tensor], eps: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    `f` must be a deterministic scalar function of the given tensors. The
    relative error for each entry is |a - n| / max(|a|, |n|, 1e-8).
    """
    for t in inputs:
        t.requires_grad = True
        t.zero_grad()
    with Tape() as tape:
        loss = f(*inputs)
    if not np.isfinite(loss.data).all():
        raise FloatingPointError("non-finite value in forward pass")
    backward(loss, tape)
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in inputs]

    worst = 0.0
    for t, a in zip(inputs, analytic):
        flat = t.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = f(*inputs).item()
            flat[i] = orig - eps
            lo = f(*inputs).item()
            flat[i] = orig
            if not (np.isfinite(hi) and np.isfinite(lo)):
                raise FloatingPointError("non-finite value while perturbing inputs")
            numeric = (hi - lo) / (2.0 * eps)
            ana = a.reshape(-1)[i]
            denom = max(abs(ana), abs(numeric), 1e-8)
            worst = max(worst, abs(ana - numeric) / denom)
    return worst
