"""Canonical ordering of the tabular feature vector."""

from dataclasses import dataclass

from ..errors import DataError
from .regions import CHANNEL_NAMES

PHYSIO_NAMES = ("gender", "age", "height", "weight", "waist", "hip", "whr", "whtr", "bmi")
DETECTION_CLASSES = ("crack", "peeled_coat", "spot", "tooth_mark")
TEXTURE_STATS = ("con", "asm", "ent", "mean")


@dataclass(frozen=True)
class FeatureSchema:
    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise DataError("feature schema names must be unique")

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"unknown feature {name!r}") from None


def canonical_schema() -> FeatureSchema:
    """The 52-feature tongue schema: physiology, region color means (body
    then coat), coat coverage, texture, morphology, detection summaries."""
    names: list[str] = list(PHYSIO_NAMES)
    for region in ("body", "coat"):
        names.extend(f"{region}_{ch}" for ch in CHANNEL_NAMES)
    names.append("coat_ratio")
    for region in ("body", "coat"):
        names.extend(f"{region}_glcm_{stat}" for stat in TEXTURE_STATS)
    names.extend(("area_ratio", "aspect_ratio"))
    for cls in DETECTION_CLASSES:
        names.extend((f"{cls}_count", f"{cls}_area"))
    return FeatureSchema(names=tuple(names))
