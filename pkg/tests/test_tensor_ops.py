import numpy as np
import pytest

from latentmimic.numcore import (
    Tape,
    Tensor,
    attention,
    backward,
    concat,
    conv3d,
    generator,
    layer_norm,
    matmul,
    mean_,
    mul,
    reshape,
    softmax,
    sub,
    sum_,
    swap_last,
    take,
)


def naive_matmul(a, b):
    m, k = a.shape
    k2, n = b.shape
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            for l in range(k):
                out[i, j] += a[i, l] * b[l, j]
    return out


def naive_conv3d(x, k, padding):
    c_in, t, h, w = x.shape
    c_out, _, kt, kh, kw = k.shape
    pt, ph, pw = padding
    xp = np.pad(x, ((0, 0), (pt, pt), (ph, ph), (pw, pw)))
    to, ho, wo = t + 2 * pt - kt + 1, h + 2 * ph - kh + 1, w + 2 * pw - kw + 1
    out = np.zeros((c_out, to, ho, wo))
    for o in range(c_out):
        for c in range(c_in):
            for a in range(to):
                for b in range(ho):
                    for d in range(wo):
                        for i in range(kt):
                            for j in range(kh):
                                for l in range(kw):
                                    out[o, a, b, d] += xp[c, a + i, b + j, d + l] * k[o, c, i, j, l]
    return out


def naive_attention(q, k, v):
    scores = q @ k.T / np.sqrt(q.shape[-1])
    scores -= scores.max(axis=-1, keepdims=True)
    e = np.exp(scores)
    w = e / e.sum(axis=-1, keepdims=True)
    return w @ v


class TestMatmul:
    def test_identity(self):
        rng = generator(0)
        b = rng.normal(size=(3, 3))
        out = matmul(Tensor(np.eye(3)), Tensor(b))
        np.testing.assert_array_equal(out.data, b)

    def test_zero(self):
        rng = generator(1)
        a = rng.normal(size=(4, 5))
        out = matmul(Tensor(a), Tensor(np.zeros((5, 2))))
        np.testing.assert_array_equal(out.data, np.zeros((4, 2)))

    def test_matches_triple_loop(self):
        rng = generator(2)
        a = rng.normal(size=(4, 5))
        b = rng.normal(size=(5, 3))
        out = matmul(Tensor(a), Tensor(b))
        np.testing.assert_allclose(out.data, naive_matmul(a, b), atol=1e-12)

    def test_triple_loop_property(self):
        rng = generator(3)
        for _ in range(100):
            m, k, n = rng.integers(1, 7, size=3)
            a = rng.normal(size=(m, k))
            b = rng.normal(size=(k, n))
            np.testing.assert_allclose(matmul(Tensor(a), Tensor(b)).data, naive_matmul(a, b), atol=1e-12)

    def test_shape_error_names_both(self):
        with pytest.raises(ValueError, match=r"\(2, 3\).*\(4, 2\)"):
            matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4, 2))))

    def test_batched_equals_serial_bitwise(self):
        rng = generator(4)
        a = rng.normal(size=(16, 6, 8))
        b = rng.normal(size=(8, 5))
        full = matmul(Tensor(a), Tensor(b)).data
        for i in range(16):
            single = matmul(Tensor(a[i]), Tensor(b)).data
            np.testing.assert_array_equal(full[i], single)


class TestSoftmax:
    def test_constant_vector(self):
        out = softmax(Tensor([2.0, 2.0, 2.0]), axis=-1)
        np.testing.assert_allclose(out.data, [1 / 3, 1 / 3, 1 / 3], atol=1e-15)

    def test_closed_form(self):
        out = softmax(Tensor([0.0, np.log(2.0)]), axis=-1)
        np.testing.assert_allclose(out.data, [1 / 3, 2 / 3], atol=1e-15)

    def test_sums_to_one(self):
        rng = generator(5)
        x = rng.normal(size=(7, 11)) * 50
        out = softmax(Tensor(x), axis=1)
        np.testing.assert_allclose(out.data.sum(axis=1), np.ones(7), atol=1e-12)
        assert (out.data >= 0).all()

    def test_empty_axis_errors(self):
        with pytest.raises(ValueError):
            softmax(Tensor(np.zeros((3, 0))), axis=1)


class TestLayerNorm:
    def test_constant_row_is_beta(self):
        out = layer_norm(Tensor(np.full((4,), 3.7)), Tensor(np.ones(4)), Tensor(np.zeros(4)))
        np.testing.assert_allclose(out.data, np.zeros(4), atol=1e-12)

    def test_zero_gamma_gives_beta(self):
        rng = generator(6)
        x = rng.normal(size=(3, 5))
        beta = rng.normal(size=5)
        out = layer_norm(Tensor(x), Tensor(np.zeros(5)), Tensor(beta))
        np.testing.assert_allclose(out.data, np.broadcast_to(beta, (3, 5)), atol=1e-15)

    def test_statistics(self):
        rng = generator(7)
        x = rng.normal(size=(64,)) * 4 + 2
        out = layer_norm(Tensor(x), Tensor(np.ones(64)), Tensor(np.zeros(64)))
        assert abs(out.data.mean()) < 1e-10
        assert abs(out.data.var() - 1.0) < 1e-4

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            layer_norm(Tensor(np.zeros((2, 4))), Tensor(np.ones(3)), Tensor(np.zeros(3)))


class TestConv3d:
    def test_identity_kernel(self):
        rng = generator(8)
        x = rng.normal(size=(1, 3, 4, 5))
        k = np.ones((1, 1, 1, 1, 1))
        out = conv3d(Tensor(x), Tensor(k))
        np.testing.assert_array_equal(out.data, x)

    def test_counting_kernel(self):
        x = np.ones((1, 3, 3, 3))
        k = np.ones((1, 1, 2, 2, 2))
        out = conv3d(Tensor(x), Tensor(k))
        np.testing.assert_array_equal(out.data, np.full((1, 2, 2, 2), 8.0))

    def test_matches_naive(self):
        rng = generator(9)
        x = rng.normal(size=(2, 3, 4, 4))
        k = rng.normal(size=(3, 2, 2, 3, 3))
        out = conv3d(Tensor(x), Tensor(k), padding=(1, 1, 1))
        np.testing.assert_allclose(out.data, naive_conv3d(x, k, (1, 1, 1)), atol=1e-12)

    def test_naive_property(self):
        rng = generator(10)
        for _ in range(100):
            ci, co = rng.integers(1, 4, size=2)
            t, h, w = rng.integers(2, 5, size=3)
            kt = int(rng.integers(1, t + 1))
            kh = int(rng.integers(1, h + 1))
            kw = int(rng.integers(1, w + 1))
            pad = tuple(rng.integers(0, 2, size=3))
            x = rng.normal(size=(ci, t, h, w))
            k = rng.normal(size=(co, ci, kt, kh, kw))
            out = conv3d(Tensor(x), Tensor(k), padding=pad)
            np.testing.assert_allclose(out.data, naive_conv3d(x, k, pad), atol=1e-12)

    def test_kernel_too_large(self):
        with pytest.raises(ValueError):
            conv3d(Tensor(np.zeros((1, 2, 2, 2))), Tensor(np.zeros((1, 1, 3, 2, 2))))

    def test_batched_equals_serial_bitwise(self):
        rng = generator(11)
        x = rng.normal(size=(8, 3, 2, 4, 4))
        k = rng.normal(size=(5, 3, 3, 3, 3))
        full = conv3d(Tensor(x), Tensor(k), padding=(1, 1, 1)).data
        for i in range(8):
            single = conv3d(Tensor(x[i]), Tensor(k), padding=(1, 1, 1)).data
            np.testing.assert_array_equal(full[i], single)


class TestAttention:
    def test_single_key_returns_value_row(self):
        rng = generator(12)
        q = rng.normal(size=(4, 8))
        k = rng.normal(size=(1, 8))
        v = rng.normal(size=(1, 8))
        out = attention(Tensor(q), Tensor(k), Tensor(v))
        np.testing.assert_allclose(out.data, np.broadcast_to(v, (4, 8)), atol=1e-12)

    def test_orthogonal_limit(self):
        d = 8
        k = np.eye(d)[:3] * 1.0
        v = generator(13).normal(size=(3, d))
        q = 400.0 * k[1:2]
        out = attention(Tensor(q), Tensor(k), Tensor(v))
        # direct softmax computation of the same limit
        scores = q @ k.T / np.sqrt(d)
        w = np.exp(scores - scores.max())
        w /= w.sum()
        np.testing.assert_allclose(out.data, w @ v, atol=1e-12)
        np.testing.assert_allclose(out.data, v[1:2], atol=1e-8)

    def test_matches_naive(self):
        rng = generator(14)
        q = rng.normal(size=(5, 6))
        k = rng.normal(size=(7, 6))
        v = rng.normal(size=(7, 6))
        out = attention(Tensor(q), Tensor(k), Tensor(v))
        np.testing.assert_allclose(out.data, naive_attention(q, k, v), atol=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            attention(Tensor(np.zeros((2, 4))), Tensor(np.zeros((3, 5))), Tensor(np.zeros((3, 5))))
        with pytest.raises(ValueError):
            attention(Tensor(np.zeros((2, 4))), Tensor(np.zeros((3, 4))), Tensor(np.zeros((2, 4))))


class TestShapeOps:
    def test_concat_take_roundtrip(self):
        rng = generator(15)
        a = rng.normal(size=(3, 4))
        b = rng.normal(size=(3, 2))
        c = concat([Tensor(a), Tensor(b)], axis=1)
        np.testing.assert_array_equal(take(c, 1, 0, 4).data, a)
        np.testing.assert_array_equal(take(c, 1, 4, 6).data, b)

    def test_swap_last(self):
        rng = generator(16)
        a = rng.normal(size=(2, 3, 4))
        np.testing.assert_array_equal(swap_last(Tensor(a)).data, a.swapaxes(-1, -2))

    def test_reductions(self):
        rng = generator(17)
        a = rng.normal(size=(3, 4))
        assert abs(sum_(Tensor(a)).item() - a.sum()) < 1e-12
        np.testing.assert_allclose(mean_(Tensor(a), axis=0).data, a.mean(axis=0), atol=1e-15)


class TestForwardFiniteness:
    def test_ops_finite_on_finite_inputs(self):
        rng = generator(18)
        x = rng.normal(size=(4, 6)) * 100
        for out in [
            softmax(Tensor(x), axis=-1),
            layer_norm(Tensor(x), Tensor(np.ones(6)), Tensor(np.zeros(6))),
            attention(Tensor(x), Tensor(x), Tensor(x)),
            matmul(Tensor(x), Tensor(x.T)),
        ]:
            assert np.isfinite(out.data).all()


class TestTapeScoping:
    def test_no_recording_without_tape(self):
        p = Tensor(np.ones((2, 2)), requires_grad=True)
        out = mul(p, p)
        assert not out.requires_grad

    def test_loss_not_on_tape_rejected(self):
        p = Tensor(np.ones(3), requires_grad=True)
        with Tape() as t1:
            loss = sum_(p)
        with Tape() as t2:
            sum_(p)
            with pytest.raises(ValueError, match="not produced"):
                backward(loss, t2)

    def test_non_scalar_loss_rejected(self):
        p = Tensor(np.ones(3), requires_grad=True)
        with Tape() as tape:
            out = mul(p, p)
            with pytest.raises(ValueError, match="scalar"):
                backward(out, tape)

    def test_frozen_subgraph_not_recorded(self):
        frozen = Tensor(np.ones((2, 2)))
        with Tape() as tape:
            mul(frozen, frozen)
        assert len(tape.nodes) == 0
