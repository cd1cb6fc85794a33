"""Dense float64 tensors with tape-based reverse-mode differentiation.

The op vocabulary is deliberately small: matmul, elementwise arithmetic,
GELU, relu, sqrt, softmax, layer_norm, conv3d, shape ops, and reductions.
Every op supports arbitrary leading batch axes, and batched execution is
bit-identical to per-sample execution (pinned by tests), which is what
lets the planner evaluate candidate populations in one pass.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


class Tensor:
    """A dense float64 array with an optional gradient slot.

    Tensors are plain values: ops return new Tensors and never mutate
    inputs. A Tensor with populated data and no pending tape is immutable
    for all practical purposes and safe to share across threads.
    """

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        self.data = arr
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def item(self) -> float:
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # Operator sugar; constants are wrapped on the fly.
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


class Node:
    """One recorded operation: kind, inputs, output, and a backward rule."""

    __slots__ = ("op", "inputs", "output", "backward_fn")

    def __init__(self, op: str, inputs: tuple, output: Tensor, backward_fn):
        self.op = op
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn


class Tape:
    """Ordered record of operations; execution order is topological."""

    __slots__ = ("nodes", "_output_ids")

    def __init__(self):
        self.nodes: list[Node] = []
        self._output_ids: set[int] = set()

    def record(self, node: Node) -> None:
        self.nodes.append(node)
        self._output_ids.add(id(node.output))

    def owns(self, t: Tensor) -> bool:
        return id(t) in self._output_ids

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        popped = _TAPE_STACK.pop()
        assert popped is self


_TAPE_STACK: list[Tape] = []


def active_tape() -> Tape | None:
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def _record(op: str, inputs: tuple[Tensor, ...], out: Tensor, backward_fn) -> Tensor:
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.record(Node(op, inputs, out, backward_fn))
    return out


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    if g.shape != t.data.shape:
        g = np.broadcast_to(g, t.data.shape)
    if t.grad is None:
        t.grad = np.array(g)
    else:
        t.grad = t.grad + g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a gradient back to `shape` after numpy broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, ss) in enumerate(zip(g.shape, shape)) if ss == 1 and gs != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def backward(loss: Tensor, tape: Tape) -> None:
    """Populate gradients of every requires_grad input reachable from loss.

    Gradients accumulate additively across uses; callers zero them between
    optimization steps.
    """
    if loss.data.size != 1:
        raise ValueError(f"backward requires a scalar loss, got shape {loss.shape}")
    if not tape.owns(loss):
        raise ValueError("loss was not produced by an operation recorded on this tape")
    loss.grad = np.ones_like(loss.data)
    for node in reversed(tape.nodes):
        g = node.output.grad
        if g is None:
            continue
        node.backward_fn(g)


# ---------------------------------------------------------------------------
# elementwise arithmetic


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.data + b.data)

    def bwd(g):
        _accumulate(a, _unbroadcast(g, a.data.shape))
        _accumulate(b, _unbroadcast(g, b.data.shape))

    return _record("add", (a, b), out, bwd)


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.data - b.data)

    def bwd(g):
        _accumulate(a, _unbroadcast(g, a.data.shape))
        _accumulate(b, _unbroadcast(-g, b.data.shape))

    return _record("sub", (a, b), out, bwd)


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.data * b.data)

    def bwd(g):
        _accumulate(a, _unbroadcast(g * b.data, a.data.shape))
        _accumulate(b, _unbroadcast(g * a.data, b.data.shape))

    return _record("mul", (a, b), out, bwd)


def scale(a, c: float) -> Tensor:
    a = _as_tensor(a)
    c = float(c)
    out = Tensor(a.data * c)

    def bwd(g):
        _accumulate(a, g * c)

    return _record("scale", (a,), out, bwd)


# ---------------------------------------------------------------------------
# nonlinearities


def gelu(a) -> Tensor:
    a = _as_tensor(a)
    x = a.data
    cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
    out = Tensor(x * cdf)

    def bwd(g):
        pdf = np.exp(-0.5 * x * x) * _INV_SQRT2PI
        _accumulate(a, g * (cdf + x * pdf))

    return _record("gelu", (a,), out, bwd)


def relu(a) -> Tensor:
    a = _as_tensor(a)
    out = Tensor(np.maximum(a.data, 0.0))

    def bwd(g):
        _accumulate(a, g * (a.data > 0.0))

    return _record("relu", (a,), out, bwd)


def sqrt(a) -> Tensor:
    a = _as_tensor(a)
    with np.errstate(invalid="ignore"):
        y = np.sqrt(a.data)  # negative input yields NaN; grad_check flags it
    out = Tensor(y)

    def bwd(g):
        _accumulate(a, g * (0.5 / y))

    return _record("sqrt", (a,), out, bwd)


def softmax(a, axis: int = -1) -> Tensor:
    a = _as_tensor(a)
    if a.data.shape[axis] == 0:
        raise ValueError("softmax over an empty axis")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(y)

    def bwd(g):
        dot = (g * y).sum(axis=axis, keepdims=True)
        _accumulate(a, (g - dot) * y)

    return _record("softmax", (a,), out, bwd)


# ---------------------------------------------------------------------------
# linear algebra


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ValueError(f"matmul requires >=2-D operands, got {a.shape} @ {b.shape}")
    if a.data.shape[-1] != b.data.shape[-2]:
        raise ValueError(f"matmul inner dimensions disagree: {a.shape} @ {b.shape}")
    out = Tensor(np.matmul(a.data, b.data))

    def bwd(g):
        ga = np.matmul(g, b.data.swapaxes(-1, -2))
        gb = np.matmul(a.data.swapaxes(-1, -2), g)
        _accumulate(a, _unbroadcast(ga, a.data.shape))
        _accumulate(b, _unbroadcast(gb, b.data.shape))

    return _record("matmul", (a, b), out, bwd)


def layer_norm(x, gamma, beta, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then affine."""
    x, gamma, beta = _as_tensor(x), _as_tensor(gamma), _as_tensor(beta)
    d = x.data.shape[-1]
    if gamma.data.shape != (d,) or beta.data.shape != (d,):
        raise ValueError(
            f"layer_norm affine shapes {gamma.shape}/{beta.shape} do not match last dim {d}"
        )
    mu = x.data.mean(axis=-1, keepdims=True)
    var = ((x.data - mu) ** 2).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = Tensor(xhat * gamma.data + beta.data)

    def bwd(g):
        reduce_axes = tuple(range(g.ndim - 1))
        _accumulate(gamma, (g * xhat).sum(axis=reduce_axes))
        _accumulate(beta, g.sum(axis=reduce_axes))
        dxhat = g * gamma.data
        m1 = dxhat.mean(axis=-1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
        _accumulate(x, inv * (dxhat - m1 - xhat * m2))

    return _record("layer_norm", (x, gamma, beta), out, bwd)


# ---------------------------------------------------------------------------
# shape ops


def reshape(a, shape) -> Tensor:
    a = _as_tensor(a)
    out = Tensor(a.data.reshape(shape))

    def bwd(g):
        _accumulate(a, g.reshape(a.data.shape))

    return _record("reshape", (a,), out, bwd)


def transpose(a, axes) -> Tensor:
    a = _as_tensor(a)
    axes = tuple(axes)
    out = Tensor(np.ascontiguousarray(a.data.transpose(axes)))
    inverse = tuple(np.argsort(axes))

    def bwd(g):
        _accumulate(a, g.transpose(inverse))

    return _record("transpose", (a,), out, bwd)


def swap_last(a) -> Tensor:
    a = _as_tensor(a)
    axes = tuple(range(a.ndim - 2)) + (a.ndim - 1, a.ndim - 2)
    return transpose(a, axes)


def concat(tensors, axis: int = -1) -> Tensor:
    ts = [_as_tensor(t) for t in tensors]
    out = Tensor(np.concatenate([t.data for t in ts], axis=axis))
    sizes = [t.data.shape[axis] for t in ts]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        for t, piece in zip(ts, np.split(g, splits, axis=axis)):
            _accumulate(t, piece)

    return _record("concat", tuple(ts), out, bwd)


def take(a, axis: int, start: int, stop: int) -> Tensor:
    """Contiguous slice [start:stop) along one axis."""
    a = _as_tensor(a)
    idx = [slice(None)] * a.ndim
    idx[axis] = slice(start, stop)
    idx = tuple(idx)
    out = Tensor(a.data[idx].copy())

    def bwd(g):
        full = np.zeros_like(a.data)
        full[idx] = g
        _accumulate(a, full)

    return _record("take", (a,), out, bwd)


# ---------------------------------------------------------------------------
# reductions


def sum_(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)
    out = Tensor(a.data.sum(axis=axis, keepdims=keepdims))

    def bwd(g):
        _accumulate(a, _spread(g, a.data.shape, axis, keepdims))

    return _record("sum", (a,), out, bwd)


def mean_(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)
    out = Tensor(a.data.mean(axis=axis, keepdims=keepdims))
    count = a.data.size if axis is None else np.prod(
        [a.data.shape[ax] for ax in _norm_axes(axis, a.ndim)]
    )

    def bwd(g):
        _accumulate(a, _spread(g, a.data.shape, axis, keepdims) / count)

    return _record("mean", (a,), out, bwd)


def _norm_axes(axis, ndim):
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(ax % ndim for ax in axis)


def _spread(g: np.ndarray, shape: tuple[int, ...], axis, keepdims: bool) -> np.ndarray:
    if axis is None:
        return np.broadcast_to(g, shape)
    if not keepdims:
        for ax in sorted(_norm_axes(axis, len(shape))):
            g = np.expand_dims(g, ax)
    return np.broadcast_to(g, shape)


# ---------------------------------------------------------------------------
# convolution


def conv3d(x, kernels, padding: tuple[int, int, int] = (0, 0, 0)) -> Tensor:
    """Cross-correlation over the last three axes.

    x: (..., C_in, T, H, W); kernels: (C_out, C_in, kT, kH, kW).
    Output dims follow T' = T + 2p_T - kT + 1 (and likewise for H, W).
    """
    x, kernels = _as_tensor(x), _as_tensor(kernels)
    if x.ndim < 4 or kernels.ndim != 5:
        raise ValueError(f"conv3d expects (...,C,T,H,W) and (O,C,kT,kH,kW), got {x.shape}, {kernels.shape}")
    c_out, c_in, kt, kh, kw = kernels.data.shape
    if x.data.shape[-4] != c_in:
        raise ValueError(f"conv3d channel mismatch: input {x.data.shape[-4]} vs kernel {c_in}")
    pt, ph, pw = padding
    pads = [(0, 0)] * (x.ndim - 3) + [(pt, pt), (ph, ph), (pw, pw)]
    xp = np.pad(x.data, pads)
    t_in, h_in, w_in = xp.shape[-3:]
    t_out, h_out, w_out = t_in - kt + 1, h_in - kh + 1, w_in - kw + 1
    if min(t_out, h_out, w_out) < 1:
        raise ValueError(
            f"conv3d kernel {(kt, kh, kw)} larger than padded input {(t_in, h_in, w_in)}"
        )
    win = np.lib.stride_tricks.sliding_window_view(xp, (kt, kh, kw), axis=(-3, -2, -1))
    # win: (..., C_in, T', H', W', kT, kH, kW) -> (..., T'H'W', C_in*kT*kH*kW)
    lead = win.ndim - 7
    order = tuple(range(lead)) + (lead + 1, lead + 2, lead + 3, lead, lead + 4, lead + 5, lead + 6)
    cols = np.ascontiguousarray(win.transpose(order)).reshape(
        x.data.shape[:-4] + (t_out * h_out * w_out, c_in * kt * kh * kw)
    )
    kmat = kernels.data.reshape(c_out, -1).T
    flat = np.matmul(cols, kmat)  # (..., T'H'W', C_out)
    out_data = np.ascontiguousarray(
        flat.reshape(x.data.shape[:-4] + (t_out, h_out, w_out, c_out)).transpose(
            tuple(range(x.ndim - 4)) + (x.ndim - 1, x.ndim - 4, x.ndim - 3, x.ndim - 2)
        )
    )
    out = Tensor(out_data)

    def bwd(g):
        # g: (..., C_out, T', H', W')
        g_cols = np.ascontiguousarray(
            g.transpose(tuple(range(g.ndim - 4)) + (g.ndim - 3, g.ndim - 2, g.ndim - 1, g.ndim - 4))
        ).reshape(x.data.shape[:-4] + (t_out * h_out * w_out, c_out))
        dkmat = np.matmul(cols.swapaxes(-1, -2), g_cols)
        if dkmat.ndim > 2:
            dkmat = dkmat.sum(axis=tuple(range(dkmat.ndim - 2)))
        _accumulate(kernels, np.ascontiguousarray(dkmat.T).reshape(kernels.data.shape))

        dxp = np.zeros_like(xp)
        gm = np.moveaxis(g, -4, -1)  # (..., T', H', W', C_out)
        for i in range(kt):
            for j in range(kh):
                for l in range(kw):
                    contrib = np.matmul(gm, kernels.data[:, :, i, j, l])  # (...,T',H',W',C_in)
                    dxp[..., i : i + t_out, j : j + h_out, l : l + w_out] += np.moveaxis(
                        contrib, -1, -4
                    )
        sl = (Ellipsis, slice(pt, t_in - pt), slice(ph, h_in - ph), slice(pw, w_in - pw))
        _accumulate(x, dxp[sl])

    return _record("conv3d", (x, kernels), out, bwd)


# ---------------------------------------------------------------------------
# attention (composite of taped primitives, so backward comes for free)


def attention(q, k, v, n_heads: int = 1, mask=None) -> Tensor:
    """softmax(QK^T / sqrt(d_head)) V over the last two axes.

    q: (..., n_q, d); k, v: (..., n_k, d). `mask` is an additive (n_q, n_k)
    array of 0 / large-negative entries. Multi-head splits d evenly.
    """
    q, k, v = _as_tensor(q), _as_tensor(k), _as_tensor(v)
    if q.data.shape[-1] != k.data.shape[-1]:
        raise ValueError(f"attention Q/K last dims disagree: {q.shape} vs {k.shape}")
    if k.data.shape[-2] != v.data.shape[-2]:
        raise ValueError(f"attention K/V row counts disagree: {k.shape} vs {v.shape}")
    d = q.data.shape[-1]
    if d % n_heads != 0:
        raise ValueError(f"model dim {d} not divisible by {n_heads} heads")
    dh = d // n_heads

    def split(t):
        n = t.data.shape[-2]
        t = reshape(t, t.data.shape[:-1] + (n_heads, dh))
        axes = tuple(range(t.ndim - 3)) + (t.ndim - 2, t.ndim - 3, t.ndim - 1)
        return transpose(t, axes)  # (..., heads, n, dh)

    qh, kh_, vh = split(q), split(k), split(v)
    scores = scale(matmul(qh, swap_last(kh_)), 1.0 / np.sqrt(dh))
    if mask is not None:
        scores = add(scores, _as_tensor(mask))
    weights = softmax(scores, axis=-1)
    ctx = matmul(weights, vh)  # (..., heads, n_q, dh)
    axes = tuple(range(ctx.ndim - 3)) + (ctx.ndim - 2, ctx.ndim - 3, ctx.ndim - 1)
    ctx = transpose(ctx, axes)  # (..., n_q, heads, dh)
    return reshape(ctx, ctx.data.shape[:-2] + (d,))
