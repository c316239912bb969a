"""Dense layers and loss for the float64 training stack.

Parameters are :class:`~selnet.core.autodiff.Var` leaves; calling a layer
builds tape nodes so one ``backward`` pass fills every ``grad``.
"""

import math

import numpy as np

from ..errors import PreconditionError, ShapeError
from . import autodiff as ad
from .autodiff import Var


def uniform_init(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    """Uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]; keeps depth bounded."""
    limit = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape)


class LinearLayer:
    """Affine map X @ W + b with W of shape (in_dim, out_dim)."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = Var(uniform_init(rng, in_dim, (in_dim, out_dim)))
        self.bias = Var(np.zeros(out_dim))

    def __call__(self, x) -> Var:
        x = x if isinstance(x, Var) else Var(x)
        if x.value.ndim != 2 or x.value.shape[1] != self.in_dim:
            raise ShapeError(
                f"linear_forward: input {x.value.shape} incompatible with "
                f"weight ({self.in_dim}, {self.out_dim})"
            )
        return ad.add(ad.matmul(x, self.weight), self.bias)

    def parameters(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def state(self):
        return []


class BatchNormLayer:
    """Per-column standardization with learned affine and running statistics.

    Training mode normalizes with batch mean and biased batch variance and
    updates the running statistics; inference mode uses the running
    statistics only, so its output is independent of batch composition.
    """

    def __init__(self, dim: int, momentum: float = 0.1, eps: float = 1e-5):
        if not 0.0 < momentum < 1.0:
            raise PreconditionError(f"batchnorm momentum must be in (0,1), got {momentum}")
        self.dim = dim
        self.momentum = momentum
        self.eps = eps
        self.gamma = Var(np.ones(dim))
        self.beta = Var(np.zeros(dim))
        self.running_mean = np.zeros(dim)
        self.running_var = np.ones(dim)

    def __call__(self, x, training: bool, update_stats: bool = True,
                 force_batch_stats: bool = False) -> Var:
        """``force_batch_stats`` normalizes with the presented batch even at
        inference (no running-stat update); used for inputs whose within-batch
        distribution is a point mass, where running statistics would divide
        evaluation drift by sqrt(eps)."""
        x = x if isinstance(x, Var) else Var(x)
        if x.value.ndim != 2 or x.value.shape[1] != self.dim:
            raise ShapeError(
                f"batchnorm_forward: input {x.value.shape} incompatible with width {self.dim}"
            )
        if training or force_batch_stats:
            if training and x.value.shape[0] < 2:
                raise PreconditionError(
                    "batchnorm_forward in training mode needs at least 2 rows "
                    "(variance of a single row is undefined)"
                )
            mu = ad.vmean(x, axis=0)
            centered = ad.sub(x, mu)
            var = ad.vmean(ad.mul(centered, centered), axis=0)
            if training and update_stats:
                m = self.momentum
                self.running_mean = (1.0 - m) * self.running_mean + m * mu.value
                self.running_var = (1.0 - m) * self.running_var + m * var.value
            xhat = ad.div(centered, ad.sqrt(ad.add(var, self.eps)))
        else:
            denom = np.sqrt(self.running_var + self.eps)
            xhat = ad.div(ad.sub(x, self.running_mean), denom)
        return ad.add(ad.mul(xhat, self.gamma), self.beta)

    def parameters(self):
        return [("gamma", self.gamma), ("beta", self.beta)]

    def state(self):
        return [("running_mean", self.running_mean), ("running_var", self.running_var)]

    def set_state(self, name: str, value: np.ndarray):
        if value.shape != (self.dim,):
            raise ShapeError(f"batchnorm stat {name}: expected ({self.dim},), got {value.shape}")
        setattr(self, name, value.astype(np.float64).copy())


def activation(kind: str, x):
    """Elementwise relu or sigmoid on a Var (or array)."""
    if kind == "relu":
        return ad.relu(x)
    if kind == "sigmoid":
        return ad.sigmoid(x)
    raise PreconditionError(f"unknown activation kind {kind!r}")


def bce_loss(prob, labels) -> float:
    """Mean binary cross-entropy of probabilities against 0/1 labels."""
    prob = np.asarray(prob, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if prob.shape != labels.shape:
        raise ShapeError(f"bce_loss mismatch: prob {prob.shape} vs labels {labels.shape}")
    p = np.clip(prob, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(labels * np.log(p) + (1.0 - labels) * np.log1p(-p)))
