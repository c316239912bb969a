"""Synthetic planted-signal datasets and the deterministic embedding stub."""

import hashlib

import numpy as np

from ..errors import PreconditionError
from ..features.schema import FeatureSchema
from .data import Dataset

INFORMATIVE_PREFIX = "inf_"
NUISANCE_PREFIX = "nui_"

# per-class mean-shift range for informative features, against noise sd 0.12
_SHIFT_LO, _SHIFT_HI = 0.10, 0.22
_NOISE_SD = 0.12
_BASE = 0.35
_INTERACTION = 0.08


def embed_stub(identifier: str, dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic pseudo-embedding in [0, 1]: a seeded hash of the id."""
    if dim < 0:
        raise PreconditionError("embed_stub: dim must be >= 0")
    values = np.empty(dim)
    block = 0
    filled = 0
    while filled < dim:
        digest = hashlib.sha256(f"{seed}:{identifier}:{block}".encode()).digest()
        for off in range(0, 32, 8):
            if filled >= dim:
                break
            chunk = int.from_bytes(digest[off:off + 8], "little")
            values[filled] = chunk / 2**64
            filled += 1
        block += 1
    return values


def synth_generate(n: int, n_informative: int, n_nuisance: int, seed: int,
                   embed_dim: int = 10) -> tuple[Dataset, str]:
    """Planted-signal dataset: informative features with per-class shifted
    means plus one correlated pair, label-independent nuisance features,
    exactly balanced labels, and stub embeddings.

    Returns the dataset and a comment string describing the generator
    parameters (written into the CSV header by the CLI).
    """
    if n < 100:
        raise PreconditionError("synth_generate needs n >= 100")
    if n_informative < 0 or n_nuisance < 0 or n_informative + n_nuisance < 1:
        raise PreconditionError("synth_generate needs at least one feature")

    rng = np.random.default_rng(seed)
    y = np.zeros(n, dtype=np.int64)
    y[: n // 2] = 1
    y = y[rng.permutation(n)]

    columns = []
    names = []
    shifts = np.linspace(_SHIFT_LO, _SHIFT_HI, n_informative) if n_informative else []
    for j in range(n_informative):
        col = _BASE + shifts[j] * y + rng.normal(0.0, _NOISE_SD, n)
        columns.append(col)
        names.append(f"{INFORMATIVE_PREFIX}{j}")
    if n_informative >= 2:
        # one pairwise interaction: shared latent with class-dependent sign
        latent = rng.normal(0.0, 1.0, n)
        columns[0] = columns[0] + _INTERACTION * latent * (2 * y - 1)
        columns[1] = columns[1] + _INTERACTION * latent
    for j in range(n_nuisance):
        columns.append(rng.uniform(0.0, 1.0, n))
        names.append(f"{NUISANCE_PREFIX}{j}")

    X = np.stack(columns, axis=1)
    embeddings = None
    if embed_dim > 0:
        embeddings = np.stack(
            [embed_stub(f"row{i}", embed_dim, seed=seed) for i in range(n)]
        )

    dataset = Dataset(schema=FeatureSchema(names=tuple(names)), X=X, y=y,
                      embeddings=embeddings)
    comment = (
        f"synth n={n} informative={n_informative} nuisance={n_nuisance} "
        f"seed={seed} embed_dim={embed_dim} base={_BASE} "
        f"shifts=[{_SHIFT_LO},{_SHIFT_HI}] noise_sd={_NOISE_SD} "
        f"interaction={_INTERACTION if n_informative >= 2 else 0} "
        f"(features {INFORMATIVE_PREFIX}0..{INFORMATIVE_PREFIX}{max(n_informative - 1, 0)} "
        f"carry signal)"
    )
    return dataset, comment
