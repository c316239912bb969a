"""Gradient correctness of every tape primitive against central differences."""

import numpy as np
import pytest

from selnet.core import autodiff as ad
from selnet.core.autodiff import Var, backward, no_grad
from selnet.errors import PreconditionError, ShapeError


def numeric_grad(fn, x, h=1e-6):
    """Central differences of a scalar-valued fn at x, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        saved = flat[i]
        flat[i] = saved + h
        plus = fn(x)
        flat[i] = saved - h
        minus = fn(x)
        flat[i] = saved
        gflat[i] = (plus - minus) / (2 * h)
    return grad


def check_op(build, x0, rtol=1e-6):
    """build(Var) -> Var output; reduces with a fixed weighted sum to scalar."""
    rng = np.random.default_rng(0)
    out0 = build(Var(x0)).value
    w = rng.normal(size=out0.shape)

    def scalar(x):
        return float((build(Var(x)).value * w).sum())

    v = Var(x0.copy())
    out = build(v)
    loss = ad.vsum(ad.mul(out, w))
    backward(loss)
    num = numeric_grad(scalar, x0.copy())
    np.testing.assert_allclose(v.grad, num, rtol=rtol, atol=1e-8)


class TestPrimitiveGradients:
    def setup_method(self):
        self.rng = np.random.default_rng(42)
        self.a = self.rng.normal(size=(4, 3))
        self.b = self.rng.normal(size=(4, 3)) + 3.0

    def test_add_sub_mul_div(self):
        other = Var(self.b)
        check_op(lambda v: ad.add(v, other), self.a)
        check_op(lambda v: ad.sub(v, other), self.a)
        check_op(lambda v: ad.mul(v, other), self.a)
        check_op(lambda v: ad.div(v, other), self.a)
        check_op(lambda v: ad.div(other, v), self.b)

    def test_broadcast_row_vector(self):
        row = Var(self.rng.normal(size=3))
        check_op(lambda v: ad.add(v, row), self.a)
        check_op(lambda v: ad.mul(v, row), self.a)
        # gradient of the broadcast side sums over rows
        v = Var(self.rng.normal(size=3))
        full = Var(self.a)
        loss = ad.vsum(ad.mul(ad.add(full, v), Var(np.ones_like(self.a))))
        backward(loss)
        np.testing.assert_allclose(v.grad, np.full(3, 4.0))

    def test_matmul_transpose(self):
        m = Var(self.rng.normal(size=(3, 5)))
        right = Var(self.rng.normal(size=(4, 2)))
        check_op(lambda v: ad.matmul(v, m), self.a)
        check_op(lambda v: ad.matmul(ad.transpose(v), right), self.a)

    def test_matmul_shape_error(self):
        with pytest.raises(ShapeError):
            ad.matmul(Var(np.ones((2, 3))), Var(np.ones((2, 3))))

    def test_activations(self):
        check_op(ad.relu, self.a)
        check_op(ad.sigmoid, self.a)
        check_op(ad.sqrt, self.b)

    def test_reductions(self):
        check_op(lambda v: ad.vsum(v), self.a)
        check_op(lambda v: ad.vsum(v, axis=0), self.a)
        check_op(lambda v: ad.vsum(v, axis=1, keepdims=True), self.a)
        check_op(lambda v: ad.vmean(v, axis=0), self.a)
        check_op(lambda v: ad.scale(v, 2.5), self.a)

    def test_concat(self):
        other = Var(self.rng.normal(size=(4, 2)))
        check_op(lambda v: ad.concat([v, other], axis=1), self.a)

    def test_split_gate(self):
        x = np.abs(self.a) + 0.1  # strictly positive, away from the kink
        check_op(ad.split_gate, x)

    def test_split_gate_rejects_negative(self):
        with pytest.raises(PreconditionError):
            ad.split_gate(Var(np.array([[-0.1]])))

    def test_bce(self):
        prob0 = 1.0 / (1.0 + np.exp(-self.a))
        labels = (self.rng.random((4, 3)) < 0.5).astype(float)

        def scalar(x):
            with no_grad():
                return float(ad.bce_loss_graph(ad.sigmoid(Var(x)), labels).value)

        v = Var(self.a.copy())
        loss = ad.bce_loss_graph(ad.sigmoid(v), labels)
        backward(loss)
        np.testing.assert_allclose(v.grad, numeric_grad(scalar, self.a.copy()), rtol=1e-6)
        # closed form through sigmoid: (p - y) / n
        np.testing.assert_allclose(v.grad, (prob0 - labels) / labels.size, rtol=1e-9)


class TestBackwardMechanics:
    def test_diamond_reuse_accumulates(self):
        # loss = sum(x * x) reuses x on both sides: grad = 2x
        x = Var(np.array([1.0, -2.0, 3.0]))
        backward(ad.vsum(ad.mul(x, x)))
        np.testing.assert_allclose(x.grad, 2 * x.value)

    def test_shared_node_two_consumers(self):
        x = Var(np.array([2.0]))
        h = ad.mul(x, x)              # x^2
        loss = ad.add(ad.vsum(h), ad.vsum(ad.mul(h, h)))  # x^2 + x^4
        backward(loss)
        np.testing.assert_allclose(x.grad, np.array([2 * 2.0 + 4 * 8.0]))

    def test_backward_requires_scalar(self):
        with pytest.raises(ShapeError):
            backward(ad.add(Var(np.ones(3)), Var(np.ones(3))))

    def test_no_grad_suppresses_tape(self):
        x = Var(np.ones(3))
        with no_grad():
            out = ad.mul(x, x)
        assert out._parents == ()
