"""The finite-difference oracle itself, and block-level gradient fidelity."""

import numpy as np
import pytest

from selnet.core import autodiff as ad
from selnet.core.autodiff import Var
from selnet.core.gradcheck import finite_diff_check, finite_diff_check_model
from selnet.core.layers import LinearLayer
from selnet.errors import PreconditionError
from selnet.model.blocks import FusionAttentionBlock, ResBlock, SelectorBlock
from selnet.model.network import SelectorNet, SelectorNetConfig

RNG = np.random.default_rng(7)


def block_params(*blocks):
    out = []
    for block in blocks:
        for _, child in block.named_children():
            out.extend(child.parameters())
    return out


def test_quadratic_toy_model():
    theta = Var(np.array([3.0]))

    def loss_fn():
        return ad.vsum(ad.mul(theta, theta))

    # numeric derivative of theta^2 at 3 is 6; analytic matches to 1e-8
    assert finite_diff_check(loss_fn, [("theta", theta)], step_size=1e-5) < 1e-8


def test_step_size_outside_range_rejected():
    theta = Var(np.array([1.0]))
    loss_fn = lambda: ad.vsum(ad.mul(theta, theta))
    with pytest.raises(PreconditionError):
        finite_diff_check(loss_fn, [("theta", theta)], step_size=1e-3)
    with pytest.raises(PreconditionError):
        finite_diff_check(loss_fn, [("theta", theta)], step_size=1e-8)


def test_non_finite_loss_rejected():
    theta = Var(np.array([0.0]))

    def loss_fn():
        return ad.vsum(ad.div(Var(np.array([1.0])), theta))

    with pytest.raises(PreconditionError):
        finite_diff_check(loss_fn, [("theta", theta)], step_size=1e-5)


def _bce_head(out, labels):
    return ad.bce_loss_graph(ad.sigmoid(ad.vsum(out, axis=1, keepdims=True)), labels)


class TestBlockGradients:
    """Each block type in isolation, against central differences."""

    def setup_method(self):
        self.X = RNG.uniform(0, 1, (6, 4))
        self.labels = RNG.integers(0, 2, (6, 1)).astype(float)

    def test_res_block(self):
        block = ResBlock(4, RNG)

        def loss_fn():
            return _bce_head(block(Var(self.X), training=True, update_stats=False),
                             self.labels)

        assert finite_diff_check(loss_fn, block_params(block), 1e-5) < 1e-4

    def test_res_block_linear_relu_variant(self):
        block = ResBlock(4, RNG, variant="linear_relu")

        def loss_fn():
            return _bce_head(block(Var(self.X), training=True), self.labels)

        assert finite_diff_check(loss_fn, block_params(block), 1e-5) < 1e-4

    @pytest.mark.parametrize("variant", ["full", "stage1_only", "stage2_only",
                                         "concat", "add", "hadamard"])
    def test_selector_block(self, variant):
        block = SelectorBlock(4, RNG, variant=variant)
        s2_source = ResBlock(4, RNG)
        s2_input = RNG.uniform(0, 1, self.X.shape)  # generic, row-varying

        def loss_fn():
            s2 = s2_source(Var(s2_input), training=True, update_stats=False)
            out, _ = block(Var(self.X), s2)
            return _bce_head(out, self.labels)

        assert finite_diff_check(loss_fn, block_params(block, s2_source), 1e-5) < 1e-4

    @pytest.mark.parametrize("variant", ["attention", "concat_linear_relu"])
    def test_fusion_attention_block(self, variant):
        block = FusionAttentionBlock(4, RNG, variant=variant)
        x_step0 = RNG.uniform(0.5, 1.5, (1, 4)) * np.ones((6, 1))  # row-constant

        def loss_fn():
            dec, step = block(Var(self.X), Var(x_step0), training=True,
                              update_stats=False, message_batch_stats=True)
            return _bce_head(ad.add(dec, step), self.labels)

        assert finite_diff_check(loss_fn, block_params(block), 1e-5) < 1e-4

    def test_batchnorm_training_mode(self):
        from selnet.core.layers import BatchNormLayer

        bn = BatchNormLayer(4)
        lin = LinearLayer(4, 4, RNG)

        def loss_fn():
            return _bce_head(bn(lin(Var(self.X)), training=True, update_stats=False),
                             self.labels)

        params = bn.parameters() + lin.parameters()
        assert finite_diff_check(loss_fn, params, 1e-5) < 1e-4


def test_small_selectornet_end_to_end():
    model = SelectorNet(SelectorNetConfig(feature_dim=5, steps=2, embed_dim=2, seed=7))
    X = RNG.uniform(0, 1, (8, 5))
    emb = RNG.uniform(0, 1, (8, 2))
    labels = RNG.integers(0, 2, 8)
    assert finite_diff_check_model(model, X, emb, labels, step_size=1e-5) < 1e-4


def test_dead_branch_gradient_exactly_zero():
    # stage1_only never consumes S2, so the S2-producing block is dead
    model = SelectorNet(SelectorNetConfig(feature_dim=4, steps=1, embed_dim=0,
                                          selector_variant="stage1_only", seed=3))
    X = RNG.uniform(0, 1, (6, 4))
    labels = RNG.integers(0, 2, 6)
    model.zero_grad()
    model.loss_graph(X, None, labels, training=True, update_stats=False)
    model.backward()
    dead = [name for name, p in model.parameters()
            if "res_s2" in name and p.grad is not None and np.any(p.grad != 0)]
    assert dead == []
