"""Kernel backend selection.

The image-feature kernels (GLCM accumulation, per-pixel color statistics)
exist twice: a numba ``@njit`` loop and a vectorized pure-numpy twin.  Which
one the package binds at import time is controlled by the ``SELNET_BACKEND``
environment variable:

* ``SELNET_BACKEND=numba`` (default when numba imports) - jitted loops
* ``SELNET_BACKEND=numpy`` - pure numpy, no compilation

``NUMBA_DISABLE_JIT=1`` (numba's own switch) also forces the numpy path so
a single familiar knob works too.  The training stack is numpy/BLAS either
way; only per-pixel feature kernels are affected.
"""

import os

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        """Identity decorator standing in for numba.njit."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def resolve_backend(env: str | None = None, jit_disabled: str | None = None) -> str:
    """Return "numba" or "numpy" for the given environment settings."""
    if env is None:
        env = os.environ.get("SELNET_BACKEND", "")
    if jit_disabled is None:
        jit_disabled = os.environ.get("NUMBA_DISABLE_JIT", "")
    env = env.strip().lower()
    if env not in ("", "numba", "numpy"):
        raise ValueError(f"SELNET_BACKEND must be 'numba' or 'numpy', got {env!r}")
    if env == "numpy":
        return "numpy"
    if jit_disabled not in ("", "0"):
        return "numpy"
    if env == "numba" and not HAVE_NUMBA:
        raise ValueError("SELNET_BACKEND=numba but numba is not importable")
    return "numba" if HAVE_NUMBA else "numpy"


BACKEND = resolve_backend()
USE_NUMBA = BACKEND == "numba"
