from . import autodiff
from .autodiff import Var, backward, no_grad
from .gradcheck import finite_diff_check, finite_diff_check_model
from .layers import BatchNormLayer, LinearLayer, activation, bce_loss
from .optim import OptimizerState, cosine_lr, sgd_step, zero_grads

__all__ = [
    "autodiff",
    "Var",
    "backward",
    "no_grad",
    "finite_diff_check",
    "finite_diff_check_model",
    "BatchNormLayer",
    "LinearLayer",
    "activation",
    "bce_loss",
    "OptimizerState",
    "cosine_lr",
    "sgd_step",
    "zero_grads",
]
