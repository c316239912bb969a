"""Masked gray-level co-occurrence texture statistics.

Gray levels come from BT.601 luma quantized to a configurable number of
bins; co-occurrence is counted symmetrically at a configurable distance
over a configurable subset of the four standard directions, with both
pixels of a pair required to lie inside the region.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, PreconditionError
from . import kernels

# direction angle (degrees) -> (row, col) offset unit
_DIRECTION_OFFSETS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}


@dataclass(frozen=True)
class GlcmConfig:
    levels: int = 64
    distance: int = 1
    directions: tuple[int, ...] = (0, 45, 90, 135)

    def __post_init__(self):
        if self.levels < 2:
            raise PreconditionError("glcm needs at least 2 gray levels")
        if self.distance < 1:
            raise PreconditionError("glcm distance must be >= 1")
        for d in self.directions:
            if d not in _DIRECTION_OFFSETS:
                raise PreconditionError(f"unknown glcm direction {d}; use 0/45/90/135")
        if not self.directions:
            raise PreconditionError("glcm needs at least one direction")

    def offsets(self) -> np.ndarray:
        return np.array(
            [
                (di * self.distance, dj * self.distance)
                for di, dj in (_DIRECTION_OFFSETS[d] for d in self.directions)
            ],
            dtype=np.int64,
        )


@dataclass
class TextureStats:
    con: float
    asm: float
    ent: float
    mean: float

    def as_array(self) -> np.ndarray:
        return np.array([self.con, self.asm, self.ent, self.mean])


def gray_levels(image: np.ndarray, levels: int = 64) -> np.ndarray:
    """BT.601 luma of an RGB image quantized to ``levels`` bins."""
    img = np.asarray(image)
    if img.ndim == 3:
        luma = (
            0.299 * img[..., 0].astype(np.float64)
            + 0.587 * img[..., 1].astype(np.float64)
            + 0.114 * img[..., 2].astype(np.float64)
        )
    elif img.ndim == 2:
        luma = img.astype(np.float64)
    else:
        raise PreconditionError(f"gray_levels: expected 2-D or RGB image, got shape {img.shape}")
    quantized = np.floor(luma * levels / 256.0).astype(np.int64)
    return np.clip(quantized, 0, levels - 1)


def glcm_probabilities(levels_img: np.ndarray, region: np.ndarray,
                       config: GlcmConfig = GlcmConfig()) -> np.ndarray:
    counts = kernels.glcm_counts(
        np.ascontiguousarray(levels_img, dtype=np.int64),
        np.ascontiguousarray(region, dtype=bool),
        config.offsets(),
        config.levels,
    )
    total = counts.sum()
    if total == 0:
        raise DataError("glcm: region has no valid co-occurring pixel pair")
    return counts / total


def texture_stats(levels_img: np.ndarray, region: np.ndarray,
                  config: GlcmConfig = GlcmConfig()) -> TextureStats:
    p = glcm_probabilities(levels_img, region, config)
    idx = np.arange(config.levels, dtype=np.float64)
    diff2 = (idx[:, None] - idx[None, :]) ** 2
    nonzero = p[p > 0]
    return TextureStats(
        con=float((diff2 * p).sum()),
        asm=float((p * p).sum()),
        ent=float(-(nonzero * np.log(nonzero)).sum()),
        mean=float((idx[:, None] * p).sum()),
    )


def glcm_texture(image: np.ndarray, region: np.ndarray,
                 config: GlcmConfig = GlcmConfig()) -> TextureStats:
    """Texture statistics of an RGB (or pre-gray) image inside a region."""
    return texture_stats(gray_levels(image, config.levels), region, config)
