"""Plain gradient descent with a cosine-annealed learning rate."""

import math
from dataclasses import dataclass

from ..errors import PreconditionError, ShapeError


@dataclass
class OptimizerState:
    base_lr: float
    epoch: int
    total_epochs: int

    def __post_init__(self):
        if self.total_epochs <= 0:
            raise PreconditionError("total_epochs must be positive")
        if not 0 <= self.epoch <= self.total_epochs:
            raise PreconditionError(
                f"epoch {self.epoch} outside [0, {self.total_epochs}]"
            )


def cosine_lr(state: OptimizerState) -> float:
    """base_lr * (1 + cos(pi * epoch / total)) / 2; base at 0, zero at total."""
    return state.base_lr * 0.5 * (1.0 + math.cos(math.pi * state.epoch / state.total_epochs))


def sgd_step(params, lr: float) -> None:
    """theta <- theta - lr * grad, in place, for every (name, Var) pair.

    A parameter whose grad is None sits on a dead branch: its gradient is
    exactly zero and the value is left untouched.
    """
    for name, p in params:
        if p.grad is None:
            continue
        if p.grad.shape != p.value.shape:
            raise ShapeError(
                f"sgd_step: grad {p.grad.shape} vs param {p.value.shape} for {name}"
            )
        p.value -= lr * p.grad


def zero_grads(params) -> None:
    for _, p in params:
        p.grad = None
