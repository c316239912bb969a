"""Coat/body partition, masked color statistics, and mask morphology."""

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, PreconditionError
from . import kernels

COAT_THRESHOLD = -45  # R - (G + B) at or below this marks tongue coat


def split_coat_body(image: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Partition tongue pixels into coat and body by the RGB difference rule.

    Integer arithmetic; the threshold is inclusive.  The two masks always
    partition the tongue mask exactly.
    """
    if not mask.any():
        raise DataError("split_coat_body: empty tongue mask")
    diff = image[..., 0].astype(np.int32) - (
        image[..., 1].astype(np.int32) + image[..., 2].astype(np.int32)
    )
    coat = mask & (diff <= COAT_THRESHOLD)
    body = mask & ~coat
    return coat, body


def coat_ratio(coat: np.ndarray, tongue: np.ndarray) -> float:
    tongue_px = int(tongue.sum())
    if tongue_px == 0:
        raise DataError("coat_ratio: empty tongue mask")
    coat_px = int(coat.sum())
    if coat_px and not (coat <= tongue).all():
        raise PreconditionError("coat_ratio: coat mask extends outside the tongue")
    return coat_px / tongue_px


CHANNEL_NAMES = ("r", "g", "b", "h", "s", "i", "y", "cr", "cb", "lab_l", "lab_a", "lab_b")


@dataclass
class RegionStats:
    """Mean of each color channel over a region; ``valid`` is False for an
    empty region, in which case all means are zero."""

    means: np.ndarray  # (12,) in CHANNEL_NAMES order
    pixel_count: int
    valid: bool

    def __getitem__(self, channel: str) -> float:
        return float(self.means[CHANNEL_NAMES.index(channel)])


def region_color_stats(image: np.ndarray, region: np.ndarray) -> RegionStats:
    """Per-pixel color conversion then arithmetic mean over the region."""
    n = int(region.sum())
    if n == 0:
        return RegionStats(means=np.zeros(12), pixel_count=0, valid=False)
    pixels = np.ascontiguousarray(image[region])
    sums = kernels.color_channel_sums(pixels)
    return RegionStats(means=sums / n, pixel_count=n, valid=True)


def morphology(mask: np.ndarray) -> tuple[float, float]:
    """(area fraction of the frame, bounding-box height over width)."""
    if not mask.any():
        raise DataError("morphology: empty mask")
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    height = rows[-1] - rows[0] + 1
    width = cols[-1] - cols[0] + 1
    area_ratio = float(mask.sum()) / mask.size
    return area_ratio, height / width
