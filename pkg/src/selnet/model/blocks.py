"""Building blocks of the feature-selecting network.

Each block keeps its alternative ("ablation") forms behind the same call
surface so the network can swap them from configuration alone.
"""

import numpy as np

from ..core import autodiff as ad
from ..core.autodiff import Var
from ..core.layers import BatchNormLayer, LinearLayer
from ..errors import PreconditionError, ShapeError

SELECTOR_VARIANTS = ("full", "stage1_only", "stage2_only", "concat", "add", "hadamard")
FAB_VARIANTS = ("attention", "concat_linear_relu")
RESBLOCK_VARIANTS = ("residual", "linear_relu")


def split(z):
    """Gate on a ReLU output: zeros stay zero, positive entries go through
    a sigmoid and land in (0.5, 1), so the gate amplifies without blowing up."""
    return ad.split_gate(z)


class ResBlock:
    """linear -> relu -> linear with additive shortcut, then batch norm.

    The ``linear_relu`` variant degrades this to relu(linear(x)).
    """

    def __init__(self, dim: int, rng: np.random.Generator, variant: str = "residual",
                 bn_beta_init: float = 0.0):
        if variant not in RESBLOCK_VARIANTS:
            raise PreconditionError(f"unknown resblock variant {variant!r}")
        self.dim = dim
        self.variant = variant
        if variant == "residual":
            self.lin1 = LinearLayer(dim, dim, rng)
            self.lin2 = LinearLayer(dim, dim, rng)
            self.bn = BatchNormLayer(dim)
            if bn_beta_init:
                self.bn.beta.value = np.full(dim, float(bn_beta_init))
        else:
            self.lin = LinearLayer(dim, dim, rng)

    def __call__(self, x, training: bool, update_stats: bool = True,
                 bn_batch_stats: bool = False) -> Var:
        if self.variant == "linear_relu":
            return ad.relu(self.lin(x))
        inner = self.lin2(ad.relu(self.lin1(x)))
        return self.bn(ad.add(x, inner), training, update_stats,
                       force_batch_stats=bn_batch_stats)

    def named_children(self):
        if self.variant == "residual":
            return [("lin1", self.lin1), ("lin2", self.lin2), ("bn", self.bn)]
        return [("lin", self.lin)]


class SelectorBlock:
    """Two-stage multiplicative feature selection.

    Stage 1 gates the raw input with S1 = split(relu(linear(X))) and keeps a
    shortcut: stage1 = X + X*S1, so dead gates pass features through
    unchanged.  Stage 2 multiplies by the processed step message S2.  The
    named ablation variants combine X and S2 with a single fused layer
    instead.
    """

    def __init__(self, dim: int, rng: np.random.Generator, variant: str = "full"):
        if variant not in SELECTOR_VARIANTS:
            raise PreconditionError(f"unknown selector variant {variant!r}")
        self.dim = dim
        self.variant = variant
        if variant in ("full", "stage1_only"):
            self.gate_lin = LinearLayer(dim, dim, rng)
        if variant == "concat":
            self.combine_lin = LinearLayer(2 * dim, dim, rng)
        elif variant in ("add", "hadamard"):
            self.combine_lin = LinearLayer(dim, dim, rng)

    def __call__(self, x, s2) -> tuple[Var, np.ndarray]:
        """Return (selected features, S1 values for the trace)."""
        if x.value.shape != s2.value.shape:
            raise ShapeError(
                f"selector_block: input {x.value.shape} vs S2 {s2.value.shape}"
            )
        variant = self.variant
        if variant in ("full", "stage1_only"):
            s1 = split(ad.relu(self.gate_lin(x)))
            stage1 = ad.add(x, ad.mul(x, s1))
            out = stage1 if variant == "stage1_only" else ad.mul(stage1, s2)
            return out, s1.value
        zeros = np.zeros_like(x.value)
        if variant == "stage2_only":
            return ad.mul(x, s2), zeros
        if variant == "concat":
            combined = ad.concat([x, s2], axis=1)
        elif variant == "add":
            combined = ad.add(x, s2)
        else:  # hadamard
            combined = ad.mul(x, s2)
        return ad.relu(self.combine_lin(combined)), zeros

    def named_children(self):
        children = []
        if hasattr(self, "gate_lin"):
            children.append(("gate_lin", self.gate_lin))
        if hasattr(self, "combine_lin"):
            children.append(("combine_lin", self.combine_lin))
        return children


class FusionAttentionBlock:
    """Fuse the step features x with the step message x_step.

    Queries come from x, keys from x_step; their (1/B)-scaled product is an
    F x F correlation matrix applied to both inputs as values.  Each output
    rejoins its own input through a shortcut and a batch norm, keeping the
    decision path and the message path decoupled.  No softmax: the 1/B
    scaling alone keeps the matrix batch-size-invariant.

    The ``concat_linear_relu`` variant replaces all of that with one fused
    relu(linear(concat(x, x_step))) used for both outputs.
    """

    def __init__(self, dim: int, rng: np.random.Generator, variant: str = "attention"):
        if variant not in FAB_VARIANTS:
            raise PreconditionError(f"unknown fusion variant {variant!r}")
        self.dim = dim
        self.variant = variant
        if variant == "attention":
            self.lin_q = LinearLayer(dim, dim, rng)
            self.lin_k = LinearLayer(dim, dim, rng)
            self.lin_dec = LinearLayer(dim, dim, rng)
            self.lin_step = LinearLayer(dim, dim, rng)
            self.bn_dec = BatchNormLayer(dim)
            self.bn_step = BatchNormLayer(dim)
        else:
            self.lin_fused = LinearLayer(2 * dim, dim, rng)

    def __call__(self, x, x_step, training: bool, update_stats: bool = True,
                 message_batch_stats: bool = False):
        """Return (x_dec_raw, x_step_next).

        ``message_batch_stats`` makes the x_step-side batch norm use the
        presented batch's statistics even at inference; the network passes
        True because its message input is row-constant by construction.
        """
        batch = x.value.shape[0]
        if batch == 0:
            raise PreconditionError("fusion_attention: empty batch")
        if self.variant == "concat_linear_relu":
            fused = ad.relu(self.lin_fused(ad.concat([x, x_step], axis=1)))
            return fused, fused
        q = self.lin_q(x)
        k = self.lin_k(x_step)
        attn = ad.scale(ad.matmul(ad.transpose(q), k), 1.0 / batch)
        dec = self.bn_dec(ad.add(x, self.lin_dec(ad.matmul(x, attn))), training, update_stats)
        step = self.bn_step(
            ad.add(x_step, self.lin_step(ad.matmul(x_step, attn))), training, update_stats,
            force_batch_stats=message_batch_stats,
        )
        return dec, step

    def attention_matrix(self, x_value: np.ndarray, x_step_value: np.ndarray) -> np.ndarray:
        """The F x F matrix for given inputs (value-level, for inspection)."""
        if self.variant != "attention":
            raise PreconditionError("this fusion variant has no attention matrix")
        with ad.no_grad():
            q = self.lin_q(Var(x_value))
            k = self.lin_k(Var(x_step_value))
        return (q.value.T @ k.value) / x_value.shape[0]

    def named_children(self):
        if self.variant == "attention":
            return [
                ("lin_q", self.lin_q),
                ("lin_k", self.lin_k),
                ("lin_dec", self.lin_dec),
                ("lin_step", self.lin_step),
                ("bn_dec", self.bn_dec),
                ("bn_step", self.bn_step),
            ]
        return [("lin_fused", self.lin_fused)]
