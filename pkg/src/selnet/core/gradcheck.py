"""Central-difference gradient oracle.

Checks every analytic gradient against (L(theta+h) - L(theta-h)) / 2h,
element by element, and reports the worst relative error.  The loss
closure must be a pure function of the parameters: batch statistics may be
used but running-statistic updates have to be disabled so both evaluations
see identical state.
"""

import math

import numpy as np

from ..errors import PreconditionError
from . import autodiff as ad
from .autodiff import Var

STEP_MIN = 1e-7
STEP_MAX = 1e-4


def finite_diff_check(loss_fn, params, step_size: float = 1e-5) -> float:
    """Max over parameter entries of |analytic - numeric| / max(1, |numeric|).

    ``loss_fn()`` must rebuild the tape and return a scalar Var; ``params``
    is a list of (name, Var) leaves it depends on.
    """
    if not STEP_MIN <= step_size <= STEP_MAX:
        raise PreconditionError(
            f"step_size {step_size} outside [{STEP_MIN}, {STEP_MAX}]"
        )

    for _, p in params:
        p.grad = None
    loss = loss_fn()
    if not np.isfinite(loss.value):
        raise PreconditionError("finite_diff_check: loss is not finite")
    ad.backward(loss)
    analytic = [
        p.grad.copy() if p.grad is not None else np.zeros_like(p.value)
        for _, p in params
    ]

    worst = 0.0
    for (_, p), a_grad in zip(params, analytic):
        flat = p.value.reshape(-1)
        a_flat = np.asarray(a_grad, dtype=np.float64).reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + step_size
            with ad.no_grad():
                loss_plus = float(loss_fn().value)
            flat[i] = saved - step_size
            with ad.no_grad():
                loss_minus = float(loss_fn().value)
            flat[i] = saved
            if not (math.isfinite(loss_plus) and math.isfinite(loss_minus)):
                raise PreconditionError("finite_diff_check: perturbed loss is not finite")
            numeric = (loss_plus - loss_minus) / (2.0 * step_size)
            err = abs(a_flat[i] - numeric) / max(1.0, abs(numeric))
            if err > worst:
                worst = err
    return worst


def finite_diff_check_model(model, X, embed, labels, step_size: float = 1e-5) -> float:
    """Gradient check for any model exposing ``loss_graph`` and ``parameters``.

    Batch norms run in training mode with statistic updates off, so both
    central-difference evaluations and the analytic pass see the same
    function of the parameters.
    """

    def loss_fn():
        loss, _, _ = model.loss_graph(X, embed, labels, training=True, update_stats=False)
        return loss

    return finite_diff_check(loss_fn, model.parameters(), step_size)
