import numpy as np

from latentmimic.numcore import (
    OptimizerState,
    Tape,
    Tensor,
    backward,
    generator,
    mul,
    optimizer_step,
    step_from_grads,
    sub,
    sum_,
)


def test_zero_grads_zero_decay_leave_params_unchanged():
    p = Tensor(generator(0).normal(size=(3, 2)), requires_grad=True)
    params = {"p": p}
    state = OptimizerState(params, lr=0.1, weight_decay=0.0)
    before = p.data.copy()
    optimizer_step(params, {"p": np.zeros_like(p.data)}, state)
    np.testing.assert_array_equal(p.data, before)
    assert state.step_count == 1


def test_first_step_closed_form():
    g = np.array([0.3, -1.2, 4.0])
    p = Tensor(np.zeros(3), requires_grad=True)
    params = {"p": p}
    lr, eps = 0.05, 1e-8
    state = OptimizerState(params, lr=lr, eps=eps, weight_decay=0.0)
    optimizer_step(params, {"p": g.copy()}, state)
    # at t=1 bias correction cancels: update = -lr * g / (|g| + eps)
    expected = -lr * g / (np.abs(g) + eps)
    np.testing.assert_allclose(p.data, expected, rtol=1e-10)
    np.testing.assert_allclose(np.sign(p.data), -np.sign(g))


def test_warmup_scales_lr_linearly():
    state = OptimizerState({}, lr=1.0, warmup_steps=10)
    assert state.effective_lr(1) == 0.1
    assert state.effective_lr(5) == 0.5
    assert state.effective_lr(10) == 1.0
    assert state.effective_lr(50) == 1.0


def test_quadratic_convergence():
    rng = generator(1)
    target = rng.normal(size=8)
    p = Tensor(rng.normal(size=8) * 3, requires_grad=True)
    params = {"p": p}
    state = OptimizerState(params, lr=0.2, weight_decay=0.0)
    initial = np.linalg.norm(p.data - target)
    for _ in range(100):
        with Tape() as tape:
            d = sub(p, Tensor(target))
            loss = sum_(mul(d, d))
        backward(loss, tape)
        step_from_grads(params, state)
    assert np.linalg.norm(p.data - target) < 0.1 * initial


def test_weight_decay_is_decoupled():
    p = Tensor(np.full(4, 2.0), requires_grad=True)
    params = {"p": p}
    state = OptimizerState(params, lr=0.1, weight_decay=0.5)
    optimizer_step(params, {"p": np.zeros(4)}, state)
    # zero grads: only the decay term acts
    np.testing.assert_allclose(p.data, 2.0 - 0.1 * 0.5 * 2.0)


def test_step_counter_increments():
    p = Tensor(np.ones(2), requires_grad=True)
    params = {"p": p}
    state = OptimizerState(params, lr=0.01)
    for i in range(5):
        optimizer_step(params, {"p": np.ones(2)}, state)
        assert state.step_count == i + 1


def test_shape_mismatch_rejected():
    import pytest

    p = Tensor(np.ones(3), requires_grad=True)
    params = {"p": p}
    state = OptimizerState(params)
    with pytest.raises(ValueError):
        optimizer_step(params, {"p": np.ones(4)}, state)
