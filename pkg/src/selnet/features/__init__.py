from .colorspace import rgb_to_hsi, rgb_to_lab, rgb_to_space, rgb_to_ycrcb
from .extract import (
    DetectionInput,
    ExtractResult,
    PhysioRecord,
    TongueObservation,
    extract_features,
    load_observation,
)
from .glcm import GlcmConfig, TextureStats, glcm_texture, gray_levels, texture_stats
from .regions import (
    RegionStats,
    coat_ratio,
    morphology,
    region_color_stats,
    split_coat_body,
)
from .schema import DETECTION_CLASSES, PHYSIO_NAMES, FeatureSchema, canonical_schema

__all__ = [
    "rgb_to_hsi",
    "rgb_to_lab",
    "rgb_to_space",
    "rgb_to_ycrcb",
    "DetectionInput",
    "ExtractResult",
    "PhysioRecord",
    "TongueObservation",
    "extract_features",
    "load_observation",
    "GlcmConfig",
    "TextureStats",
    "glcm_texture",
    "gray_levels",
    "texture_stats",
    "RegionStats",
    "coat_ratio",
    "morphology",
    "region_color_stats",
    "split_coat_body",
    "DETECTION_CLASSES",
    "PHYSIO_NAMES",
    "FeatureSchema",
    "canonical_schema",
]
