"""Non-invasive NAFLD screening: tongue-image feature extraction plus an
attentive feature-selecting tabular classifier with per-feature
interpretability reports."""

__version__ = "0.1.0"

from . import backend, core, features, model, pipeline  # noqa: F401
