"""Assembly of the full feature vector for one tongue observation."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, ShapeError
from . import regions
from .glcm import GlcmConfig, gray_levels, texture_stats
from .regions import RegionStats, coat_ratio, morphology, region_color_stats, split_coat_body
from .schema import DETECTION_CLASSES, FeatureSchema, canonical_schema


@dataclass
class TongueObservation:
    """8-bit RGB image plus a same-sized binary tongue mask."""

    image: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.image = np.asarray(self.image)
        self.mask = np.asarray(self.mask).astype(bool)
        if self.image.ndim != 3 or self.image.shape[2] != 3:
            raise ShapeError(f"observation image must be HxWx3, got {self.image.shape}")
        if self.image.dtype != np.uint8:
            raise DataError(f"observation image must be 8-bit, got {self.image.dtype}")
        if self.mask.shape != self.image.shape[:2]:
            raise ShapeError(
                f"mask {self.mask.shape} does not match image {self.image.shape[:2]}"
            )
        if not self.mask.any():
            raise DataError("observation mask has no tongue pixels")


@dataclass
class PhysioRecord:
    """Raw physiological indicators; the derived ratios are filled on demand.

    Height and waist/hip are centimeters, weight kilograms; gender is
    encoded male=1, female=0.
    """

    gender: float
    age: float
    height: float
    weight: float
    waist: float
    hip: float
    whr: float | None = None
    whtr: float | None = None
    bmi: float | None = None

    def derived(self) -> "PhysioRecord":
        whr = self.whr if self.whr is not None else self.waist / self.hip
        whtr = self.whtr if self.whtr is not None else self.waist / self.height
        bmi = self.bmi if self.bmi is not None else self.weight / (self.height / 100.0) ** 2
        return PhysioRecord(self.gender, self.age, self.height, self.weight,
                            self.waist, self.hip, whr, whtr, bmi)

    def as_values(self) -> list[float]:
        rec = self.derived()
        return [rec.gender, rec.age, rec.height, rec.weight, rec.waist, rec.hip,
                rec.whr, rec.whtr, rec.bmi]


@dataclass
class DetectionInput:
    """Per-class detection summary: box count and union-area over tongue area."""

    counts: dict[str, int] = field(default_factory=dict)
    area_ratios: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for cls in self.counts:
            if cls not in DETECTION_CLASSES:
                raise DataError(f"unknown detection class {cls!r}")
        for cls, count in self.counts.items():
            if count < 0:
                raise DataError(f"negative detection count for {cls!r}")
        for cls, ratio in self.area_ratios.items():
            if not 0.0 <= ratio <= 1.0:
                raise DataError(f"detection area ratio for {cls!r} outside [0, 1]")

    @classmethod
    def from_boxes(cls, boxes: list[tuple[str, int, int, int, int]],
                   obs: TongueObservation) -> "DetectionInput":
        """Summarize (class, x_min, y_min, x_max, y_max) boxes; coordinates are
        pixels with exclusive maxima, clipped to the frame."""
        h, w = obs.mask.shape
        tongue_px = int(obs.mask.sum())
        counts = {c: 0 for c in DETECTION_CLASSES}
        union = {c: np.zeros((h, w), dtype=bool) for c in DETECTION_CLASSES}
        for name, x_min, y_min, x_max, y_max in boxes:
            if name not in DETECTION_CLASSES:
                raise DataError(f"unknown detection class {name!r}")
            counts[name] += 1
            x0, x1 = max(0, int(x_min)), min(w, int(x_max))
            y0, y1 = max(0, int(y_min)), min(h, int(y_max))
            if x0 < x1 and y0 < y1:
                union[name][y0:y1, x0:x1] = True
        ratios = {
            c: min(1.0, int(union[c].sum()) / tongue_px) for c in DETECTION_CLASSES
        }
        return cls(counts=counts, area_ratios=ratios)

    def as_values(self) -> list[float]:
        out = []
        for cls in DETECTION_CLASSES:
            out.append(float(self.counts.get(cls, 0)))
            out.append(float(self.area_ratios.get(cls, 0.0)))
        return out


@dataclass
class ExtractResult:
    values: np.ndarray
    flags: dict[str, bool]


def _region_texture(levels_img, region, config) -> tuple[np.ndarray, bool]:
    if region.any():
        try:
            return texture_stats(levels_img, region, config).as_array(), True
        except DataError:
            pass  # no co-occurring pair (e.g. a single isolated pixel)
    return np.zeros(4), False


def extract_features(obs: TongueObservation, physio: PhysioRecord,
                     detections: DetectionInput,
                     schema: FeatureSchema | None = None,
                     glcm_config: GlcmConfig = GlcmConfig()) -> ExtractResult:
    """Compute the canonical feature vector for one observation.

    An empty region (a tongue with no coat pixels, or all coat) yields
    zeroed color/texture entries plus a False validity flag instead of an
    error; pale tongues without any coat do occur.
    """
    if schema is None:
        schema = canonical_schema()
    coat, body = split_coat_body(obs.image, obs.mask)
    body_stats = region_color_stats(obs.image, body)
    coat_stats = region_color_stats(obs.image, coat)
    levels_img = gray_levels(obs.image, glcm_config.levels)
    body_tex, body_tex_valid = _region_texture(levels_img, body, glcm_config)
    coat_tex, coat_tex_valid = _region_texture(levels_img, coat, glcm_config)
    area_ratio, aspect_ratio = morphology(obs.mask)

    values = np.concatenate([
        np.asarray(physio.as_values(), dtype=np.float64),
        body_stats.means,
        coat_stats.means,
        [coat_ratio(coat, obs.mask)],
        body_tex,
        coat_tex,
        [area_ratio, aspect_ratio],
        np.asarray(detections.as_values(), dtype=np.float64),
    ])
    if values.shape[0] != len(schema):
        raise ShapeError(
            f"extract_features: built {values.shape[0]} values for a "
            f"{len(schema)}-feature schema"
        )
    flags = {
        "body_valid": body_stats.valid,
        "coat_valid": coat_stats.valid,
        "body_texture_valid": body_tex_valid,
        "coat_texture_valid": coat_tex_valid,
    }
    return ExtractResult(values=values, flags=flags)


def load_observation(image_path, mask_path) -> TongueObservation:
    """Read an RGB image and its mask PNG (any nonzero pixel marks tongue)."""
    from PIL import Image

    image = np.asarray(Image.open(image_path).convert("RGB"))
    mask_raw = np.asarray(Image.open(mask_path).convert("L"))
    return TongueObservation(image=image, mask=mask_raw > 0)
