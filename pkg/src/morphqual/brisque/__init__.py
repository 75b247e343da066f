"""Built-in pixel-level no-reference quality estimator (BRISQUE family).

Natural-scene-statistics features from locally normalized luminance, scored
by an RBF support vector regressor. Lower scores mean better quality.
"""

from .pipeline import (
    AggdFit,
    BrisqueConfig,
    GgdFit,
    ImageTooSmall,
    features,
    fit_aggd,
    fit_ggd,
    mscn,
    paired_products,
)
from .model import ModelMismatch, SvrModel, default_model, score

__all__ = [
    "AggdFit",
    "BrisqueConfig",
    "GgdFit",
    "ImageTooSmall",
    "ModelMismatch",
    "SvrModel",
    "default_model",
    "features",
    "fit_aggd",
    "fit_ggd",
    "mscn",
    "paired_products",
    "score",
]
