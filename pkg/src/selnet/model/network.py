"""The step-chained feature-selecting network.

Every step consumes the original input features together with the message
x_step handed over by the previous step (all ones at step one).  A step
selects features, refines them, fuses them with the message, and emits a
decision contribution x_dec; the contributions of all steps are summed,
concatenated with an externally supplied embedding, and mapped to a single
probability.
"""

from dataclasses import dataclass, replace

import numpy as np

from ..core import autodiff as ad
from ..core.autodiff import Var, backward, no_grad
from ..core.layers import BatchNormLayer, LinearLayer
from ..errors import PreconditionError, ShapeError, StateError
from .blocks import (
    FAB_VARIANTS,
    RESBLOCK_VARIANTS,
    SELECTOR_VARIANTS,
    FusionAttentionBlock,
    ResBlock,
    SelectorBlock,
)


@dataclass(frozen=True)
class SelectorNetConfig:
    feature_dim: int
    steps: int = 3
    embed_dim: int = 10
    selector_variant: str = "full"
    fab_variant: str = "attention"
    resblock_variant: str = "residual"
    seed: int = 0

    def __post_init__(self):
        if self.feature_dim < 1:
            raise PreconditionError("feature_dim must be >= 1")
        if self.steps < 1:
            raise PreconditionError("steps must be >= 1")
        if self.embed_dim < 0:
            raise PreconditionError("embed_dim must be >= 0")
        if self.selector_variant not in SELECTOR_VARIANTS:
            raise PreconditionError(f"unknown selector variant {self.selector_variant!r}")
        if self.fab_variant not in FAB_VARIANTS:
            raise PreconditionError(f"unknown fusion variant {self.fab_variant!r}")
        if self.resblock_variant not in RESBLOCK_VARIANTS:
            raise PreconditionError(f"unknown resblock variant {self.resblock_variant!r}")

    def to_dict(self) -> dict:
        return {
            "feature_dim": self.feature_dim,
            "steps": self.steps,
            "embed_dim": self.embed_dim,
            "selector_variant": self.selector_variant,
            "fab_variant": self.fab_variant,
            "resblock_variant": self.resblock_variant,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SelectorNetConfig":
        return cls(**d)


@dataclass
class StepTrace:
    """Per-step record used for the attention report (value arrays, B x F)."""

    s1: np.ndarray
    s2: np.ndarray
    x_step_in: np.ndarray
    x_step_out: np.ndarray
    x_dec: np.ndarray


@dataclass
class _Step:
    selector: SelectorBlock
    res_s2: ResBlock
    res_post: ResBlock
    fab: FusionAttentionBlock
    dec_res1: ResBlock
    dec_res2: ResBlock

    def named_children(self):
        return [
            ("selector", self.selector),
            ("res_s2", self.res_s2),
            ("res_post", self.res_post),
            ("fab", self.fab),
            ("dec_res1", self.dec_res1),
            ("dec_res2", self.dec_res2),
        ]


class SelectorNet:
    """Feature-selecting classifier with per-step interpretability traces."""

    # The fusion block consumes the raw incoming message; the ResBlock-processed
    # message serves selection only.  Single point to flip if that coupling
    # should ever change.
    FAB_CONSUMES_PROCESSED_STEP = False

    def __init__(self, config: SelectorNetConfig):
        self.config = config
        rng = np.random.default_rng(config.seed)
        F = config.feature_dim
        self.steps = []
        for _ in range(config.steps):
            self.steps.append(
                _Step(
                    selector=SelectorBlock(F, rng, config.selector_variant),
                    # x_step is row-constant by construction, so this block's
                    # training-mode batch norm outputs exactly its beta.  Beta
                    # must start nonzero or the multiplicative Stage-2 gate
                    # annihilates every feature (batch norms then sit at zero
                    # variance and gradients blow up by (var+eps)^-1/2 per
                    # layer); it also sets the attention report's shared
                    # baseline, so it starts below the Stage-1 gate's dynamic
                    # range instead of drowning the per-feature contrast.
                    res_s2=ResBlock(F, rng, config.resblock_variant, bn_beta_init=0.4),
                    res_post=ResBlock(F, rng, config.resblock_variant),
                    fab=FusionAttentionBlock(F, rng, config.fab_variant),
                    dec_res1=ResBlock(F, rng, config.resblock_variant),
                    dec_res2=ResBlock(F, rng, config.resblock_variant),
                )
            )
        self.head = LinearLayer(F + config.embed_dim, 1, rng)
        self._pending_loss = None

    # ------------------------------------------------------------------
    # forward / backward
    # ------------------------------------------------------------------

    def _check_inputs(self, X: np.ndarray, embed) -> tuple[np.ndarray, np.ndarray | None]:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.config.feature_dim:
            raise ShapeError(
                f"forward: data width {X.shape[1] if X.ndim == 2 else X.shape} "
                f"does not match configured feature_dim {self.config.feature_dim}"
            )
        E = self.config.embed_dim
        if E == 0:
            if embed is not None and np.asarray(embed).size != 0:
                raise ShapeError("forward: model configured without an embedding input")
            return X, None
        if embed is None:
            raise ShapeError(f"forward: embedding of width {E} required")
        embed = np.asarray(embed, dtype=np.float64)
        if embed.ndim != 2 or embed.shape != (X.shape[0], E):
            raise ShapeError(
                f"forward: embedding {embed.shape} does not match ({X.shape[0]}, {E})"
            )
        return X, embed

    def _forward_graph(self, X, embed, training: bool, update_stats: bool):
        B = X.shape[0]
        x_in = Var(X)
        x_step = Var(np.ones_like(X))
        traces: list[StepTrace] = []
        decision_sum = None
        for step in self.steps:
            # The message x_step is row-constant for every batch (ones, then a
            # shared-matrix recurrence), so its batch distribution is a point
            # mass.  Batch norms on that chain therefore always normalize with
            # the presented batch, which collapses exactly to their beta at any
            # batch size; running statistics would divide evaluation drift by
            # sqrt(eps) and blow up inference.
            s2 = step.res_s2(x_step, training, update_stats, bn_batch_stats=True)
            selected, s1_values = step.selector(x_in, s2)
            x = step.res_post(selected, training, update_stats)
            fab_message = s2 if self.FAB_CONSUMES_PROCESSED_STEP else x_step
            x_dec_raw, x_step_next = step.fab(x, fab_message, training, update_stats,
                                              message_batch_stats=True)
            x_dec = step.dec_res2(
                step.dec_res1(x_dec_raw, training, update_stats), training, update_stats
            )
            traces.append(
                StepTrace(
                    s1=s1_values.copy(),
                    s2=s2.value.copy(),
                    x_step_in=x_step.value.copy(),
                    x_step_out=x_step_next.value.copy(),
                    x_dec=x_dec.value.copy(),
                )
            )
            decision_sum = x_dec if decision_sum is None else ad.add(decision_sum, x_dec)
            x_step = x_step_next
        head_in = decision_sum if embed is None else ad.concat([decision_sum, Var(embed)], axis=1)
        prob = ad.sigmoid(self.head(head_in))
        return prob, traces

    def forward(self, X, embed=None, training: bool = False, update_stats: bool = True):
        """Value-level forward pass: (probabilities (B,), step traces)."""
        X, embed = self._check_inputs(X, embed)
        with no_grad():
            prob, traces = self._forward_graph(X, embed, training, update_stats)
        return prob.value.reshape(-1), traces

    def loss_graph(self, X, embed, labels, training: bool = True, update_stats: bool = True):
        """Forward plus loss on the tape; returns (loss Var, prob (B,), traces).

        Call :meth:`backward` afterwards to fill parameter gradients.
        """
        X, embed = self._check_inputs(X, embed)
        labels = np.asarray(labels, dtype=np.float64).reshape(-1, 1)
        if labels.shape[0] != X.shape[0]:
            raise ShapeError(
                f"loss_graph: {labels.shape[0]} labels for {X.shape[0]} rows"
            )
        prob, traces = self._forward_graph(X, embed, training, update_stats)
        loss = ad.bce_loss_graph(prob, labels)
        self._pending_loss = loss
        return loss, prob.value.reshape(-1), traces

    def backward(self) -> None:
        """Propagate gradients of the most recent loss_graph into parameters."""
        if self._pending_loss is None:
            raise StateError("backward called without a preceding loss_graph forward")
        backward(self._pending_loss)
        self._pending_loss = None

    def zero_grad(self) -> None:
        for _, p in self.parameters():
            p.grad = None

    # ------------------------------------------------------------------
    # parameter / state traversal
    # ------------------------------------------------------------------

    @staticmethod
    def _walk(prefix, module):
        if hasattr(module, "named_children"):
            for child_name, child in module.named_children():
                yield from SelectorNet._walk(f"{prefix}.{child_name}", child)
        else:
            yield prefix, module

    def _named_modules(self):
        """Leaf layers (linears and batch norms) with dotted path names."""
        for i, step in enumerate(self.steps):
            yield from self._walk(f"step{i}", step)
        yield "head", self.head

    def parameters(self) -> list[tuple[str, Var]]:
        out = []
        for mod_name, mod in self._named_modules():
            for p_name, p in mod.parameters():
                out.append((f"{mod_name}.{p_name}", p))
        return out

    def state_arrays(self) -> list[tuple[str, np.ndarray]]:
        """Parameters plus batch-norm running statistics, in a stable order."""
        out = [(name, p.value) for name, p in self.parameters()]
        for mod_name, mod in self._named_modules():
            for s_name, s in mod.state():
                out.append((f"{mod_name}.{s_name}", s))
        return out

    def get_state(self) -> dict[str, np.ndarray]:
        return {name: arr.copy() for name, arr in self.state_arrays()}

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        own = dict(self.state_arrays())
        missing = sorted(set(own) - set(state))
        extra = sorted(set(state) - set(own))
        if missing or extra:
            raise ShapeError(
                f"state mismatch: missing {missing[:3]}, unexpected {extra[:3]}"
            )
        params = dict(self.parameters())
        for mod_name, mod in self._named_modules():
            for s_name, _ in mod.state():
                mod.set_state(s_name, state[f"{mod_name}.{s_name}"])
        for name, p in params.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != p.value.shape:
                raise ShapeError(
                    f"state {name}: expected {p.value.shape}, got {value.shape}"
                )
            p.value = value.copy()


def build_model(config: SelectorNetConfig) -> SelectorNet:
    return SelectorNet(config)


def config_with(config: SelectorNetConfig, **overrides) -> SelectorNetConfig:
    return replace(config, **overrides)
