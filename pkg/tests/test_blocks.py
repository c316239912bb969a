"""Block semantics: the split gate, selection stages, residual and fusion blocks."""

import numpy as np
import pytest

from selnet.core.autodiff import Var
from selnet.errors import PreconditionError, ShapeError
from selnet.model.blocks import FusionAttentionBlock, ResBlock, SelectorBlock, split

SIGMOID_2 = 0.8807970779778823
SIGMOID_1 = 0.7310585786300049
RNG = np.random.default_rng(123)


class TestSplit:
    def test_all_dead_features_stay_zero(self):
        out = split(Var(np.array([[0.0, 0.0, 0.0]])))
        np.testing.assert_array_equal(out.value, [[0.0, 0.0, 0.0]])

    def test_positive_goes_through_sigmoid(self):
        out = split(Var(np.array([[2.0]])))
        np.testing.assert_allclose(out.value, [[SIGMOID_2]], rtol=1e-15)

    def test_mixed(self):
        out = split(Var(np.array([[0.0, 1.0]])))
        np.testing.assert_allclose(out.value, [[0.0, SIGMOID_1]], rtol=1e-15)

    def test_negative_rejected(self):
        with pytest.raises(PreconditionError):
            split(Var(np.array([[-1e-9]])))

    def test_split_law_random_relu_outputs(self):
        x = np.maximum(RNG.normal(size=100_000), 0.0)
        out = split(Var(x)).value
        zero = x == 0
        assert np.all(out[zero] == 0.0)
        assert np.all(out[~zero] > 0.5) and np.all(out[~zero] < 1.0)


class TestSelectorBlock:
    def test_hand_example_full_variant(self):
        # identity gate linear, zero bias: S1 = split(relu(X))
        block = SelectorBlock(2, RNG, variant="full")
        block.gate_lin.weight.value = np.eye(2)
        block.gate_lin.bias.value = np.zeros(2)
        X = Var(np.array([[2.0, -1.0]]))
        S2 = Var(np.array([[0.5, 2.0]]))
        out, s1 = block(X, S2)
        np.testing.assert_allclose(s1, [[SIGMOID_2, 0.0]], rtol=1e-15)
        stage1 = X.value * (1.0 + s1)
        np.testing.assert_allclose(stage1, [[3.7615941559557644, -1.0]], rtol=1e-12)
        np.testing.assert_allclose(out.value, [[1.8807970779778822, -2.0]], rtol=1e-12)

    def test_dead_gate_with_unit_s2_is_identity(self):
        # S1 all zero and S2 all ones: the shortcut keeps the input intact
        block = SelectorBlock(3, RNG, variant="full")
        block.gate_lin.weight.value = np.zeros((3, 3))
        block.gate_lin.bias.value = np.zeros(3)
        X = RNG.uniform(-1, 1, (4, 3))
        out, s1 = block(Var(X), Var(np.ones_like(X)))
        np.testing.assert_array_equal(s1, np.zeros_like(X))
        np.testing.assert_allclose(out.value, X, rtol=1e-15)

    def test_stage2_only_unit_s2_is_identity(self):
        block = SelectorBlock(3, RNG, variant="stage2_only")
        X = RNG.uniform(-1, 1, (4, 3))
        out, s1 = block(Var(X), Var(np.ones_like(X)))
        np.testing.assert_array_equal(out.value, X)
        np.testing.assert_array_equal(s1, np.zeros_like(X))

    def test_stage1_only_ignores_s2(self):
        block = SelectorBlock(2, RNG, variant="stage1_only")
        X = Var(np.array([[0.3, 0.7]]))
        out_a, _ = block(X, Var(np.full((1, 2), 5.0)))
        out_b, _ = block(X, Var(np.full((1, 2), -3.0)))
        np.testing.assert_array_equal(out_a.value, out_b.value)

    def test_stage1_amplification_bounds(self):
        # |stage1| in [|X|, 2|X|): the gate only amplifies, below doubling
        block = SelectorBlock(6, RNG, variant="stage1_only")
        X = RNG.uniform(-2, 2, (50, 6))
        out, _ = block(Var(X), Var(np.ones_like(X)))
        ratio = np.abs(out.value) / np.maximum(np.abs(X), 1e-300)
        assert np.all(ratio >= 1.0) and np.all(ratio < 2.0)

    @pytest.mark.parametrize("variant", ["concat", "add", "hadamard"])
    def test_fused_variants_shape_and_nonnegativity(self, variant):
        block = SelectorBlock(4, RNG, variant=variant)
        X = RNG.uniform(-1, 1, (5, 4))
        out, s1 = block(Var(X), Var(RNG.uniform(-1, 1, (5, 4))))
        assert out.value.shape == (5, 4)
        assert np.all(out.value >= 0)  # relu output
        np.testing.assert_array_equal(s1, np.zeros((5, 4)))

    def test_shape_mismatch(self):
        block = SelectorBlock(3, RNG)
        with pytest.raises(ShapeError):
            block(Var(np.ones((2, 3))), Var(np.ones((2, 4))))


class TestResBlock:
    def test_zeroed_inner_linears_identity_at_identity_stats(self):
        block = ResBlock(3, RNG)
        block.lin1.weight.value = np.zeros((3, 3))
        block.lin1.bias.value = np.zeros(3)
        block.lin2.weight.value = np.zeros((3, 3))
        block.lin2.bias.value = np.zeros(3)
        X = RNG.uniform(-1, 1, (4, 3))
        out = block(Var(X), training=False)  # fresh running stats: mean 0, var 1
        np.testing.assert_allclose(out.value, X / np.sqrt(1 + block.bn.eps), rtol=1e-12)

    @pytest.mark.parametrize("dim", [1, 2, 7])
    def test_shape_preserved(self, dim):
        block = ResBlock(dim, RNG)
        X = RNG.uniform(size=(5, dim))
        assert block(Var(X), training=True).value.shape == (5, dim)

    def test_seeded_reference_reevaluation(self):
        # step-by-step recomputation with plain numpy
        rng = np.random.default_rng(77)
        block = ResBlock(2, rng)
        X = np.array([[1.0, 0.0], [0.2, -0.4], [0.5, 0.9]])
        out = block(Var(X), training=True, update_stats=False).value

        w1, b1 = block.lin1.weight.value, block.lin1.bias.value
        w2, b2 = block.lin2.weight.value, block.lin2.bias.value
        inner = np.maximum(X @ w1 + b1, 0.0) @ w2 + b2
        pre = X + inner
        mu = pre.mean(axis=0)
        var = ((pre - mu) ** 2).mean(axis=0)
        expected = (pre - mu) / np.sqrt(var + block.bn.eps)
        expected = expected * block.bn.gamma.value + block.bn.beta.value
        np.testing.assert_allclose(out, expected, rtol=1e-12)


class TestFusionAttention:
    def test_pure_shortcut_with_zeroed_linears(self):
        block = FusionAttentionBlock(3, RNG)
        for lin in (block.lin_q, block.lin_k, block.lin_dec, block.lin_step):
            lin.weight.value = np.zeros((3, 3))
            lin.bias.value = np.zeros(3)
        x = RNG.uniform(-1, 1, (4, 3))
        x_step = RNG.uniform(-1, 1, (4, 3))
        dec, step = block(Var(x), Var(x_step), training=False)  # identity stats
        shrink = np.sqrt(1 + block.bn_dec.eps)
        np.testing.assert_allclose(dec.value, x / shrink, rtol=1e-12)
        np.testing.assert_allclose(step.value, x_step / shrink, rtol=1e-12)

    @pytest.mark.parametrize("batch", [1, 3, 16])
    def test_attention_matrix_shape_independent_of_batch(self, batch):
        block = FusionAttentionBlock(5, RNG)
        x = RNG.uniform(size=(batch, 5))
        assert block.attention_matrix(x, np.ones_like(x)).shape == (5, 5)

    def test_single_sample_outer_product_hand_trace(self):
        block = FusionAttentionBlock(2, np.random.default_rng(11))
        x = np.array([[0.3, -0.8]])
        x_step = np.array([[1.0, 1.0]])
        q = x @ block.lin_q.weight.value + block.lin_q.bias.value
        k = x_step @ block.lin_k.weight.value + block.lin_k.bias.value
        np.testing.assert_allclose(block.attention_matrix(x, x_step),
                                   np.outer(q[0], k[0]), rtol=1e-12)
        # full outputs against a hand evaluation (inference, fresh stats)
        attn = np.outer(q[0], k[0])
        dec_pre = x + (x @ attn) @ block.lin_dec.weight.value + block.lin_dec.bias.value
        dec, _ = block(Var(x), Var(x_step), training=False)
        np.testing.assert_allclose(
            dec.value, dec_pre / np.sqrt(1 + block.bn_dec.eps), rtol=1e-12
        )

    def test_empty_batch_rejected(self):
        block = FusionAttentionBlock(2, RNG)
        with pytest.raises(PreconditionError):
            block(Var(np.ones((0, 2))), Var(np.ones((0, 2))), training=False)

    def test_concat_variant_outputs_coincide(self):
        block = FusionAttentionBlock(3, RNG, variant="concat_linear_relu")
        x = RNG.uniform(size=(4, 3))
        dec, step = block(Var(x), Var(np.ones_like(x)), training=True)
        np.testing.assert_array_equal(dec.value, step.value)
        assert np.all(dec.value >= 0)
