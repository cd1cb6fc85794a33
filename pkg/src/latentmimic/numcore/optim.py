"""AdamW-style optimizer with decoupled weight decay and linear warmup."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


class OptimizerState:
    """Per-parameter moment accumulators plus the shared schedule.

    Weight decay is decoupled (applied directly to parameters, not through
    the moments) and the learning rate ramps linearly over `warmup_steps`.
    """

    def __init__(
        self,
        params: dict[str, Tensor],
        lr: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.0,
        warmup_steps: int = 0,
    ):
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.warmup_steps = warmup_steps
        self.step_count = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def effective_lr(self, step: int) -> float:
        if self.warmup_steps > 0 and step <= self.warmup_steps:
            return self.lr * step / self.warmup_steps
        return self.lr


def optimizer_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    state: OptimizerState,
) -> None:
    """One AdamW update over the parameter dict; mutates params in place."""
    state.step_count += 1
    t = state.step_count
    lr = state.effective_lr(t)
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            continue
        if g.shape != p.data.shape:
            raise ValueError(f"grad shape {g.shape} does not match param '{name}' {p.data.shape}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        mhat = m / bc1
        vhat = v / bc2
        p.data = p.data - lr * (mhat / (np.sqrt(vhat) + state.eps) + state.weight_decay * p.data)


def step_from_grads(params: dict[str, Tensor], state: OptimizerState) -> None:
    """Convenience wrapper: read grads off the tensors, then zero them."""
    grads = {k: p.grad for k, p in params.items() if p.grad is not None}
    optimizer_step(params, grads, state)
    for p in params.values():
        p.zero_grad()
