"""scikit-learn-compatible wrappers around the quality and detection cores.

These make the pipeline compose with the wider ecosystem: the feature
extractor and scorer behave like transformers over image arrays, and the
fixed-BPCER detector is a fit/predict classifier over detection scores.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .brisque import BrisqueConfig, default_model, features, score
from .brisque.model import SvrModel, load_model
from .madeval import DecisionThreshold, bpcer, threshold_at_bpcer


def _as_image_batch(X) -> list[np.ndarray]:
    if isinstance(X, np.ndarray) and X.ndim == 3:
        batch = [X[i] for i in range(X.shape[0])]
    else:
        batch = [np.asarray(img, dtype=np.float64) for img in X]
    for img in batch:
        if img.ndim != 2:
            raise ValueError("each image must be a 2-d luminance array")
        if not np.all(np.isfinite(img)):
            raise ValueError("images must be finite")
    return batch


class BrisqueFeatureExtractor(TransformerMixin, BaseEstimator):
    """Stateless transformer: luminance images -> (n_samples, 36) features."""

    def __init__(self, window_radius: int = 3, gaussian_sigma: float = 7.0 / 6.0,
                 stability_constant: float = 1.0 / 255.0):
        self.window_radius = window_radius
        self.gaussian_sigma = gaussian_sigma
        self.stability_constant = stability_constant

    def _config(self) -> BrisqueConfig:
        return BrisqueConfig(
            window_radius=self.window_radius,
            gaussian_sigma=self.gaussian_sigma,
            stability_constant=self.stability_constant,
        )

    def fit(self, X, y=None):
        self._config()  # validates parameters
        return self

    def transform(self, X) -> np.ndarray:
        cfg = self._config()
        return np.vstack([features(img, cfg) for img in _as_image_batch(X)])


class BrisqueScorer(BaseEstimator):
    """Luminance images -> raw quality scores (lower is better).

    Uses the packaged SVR head unless `model_path` points at another model
    in the documented plain-text format.
    """

    def __init__(self, model_path: str | None = None, window_radius: int = 3,
                 gaussian_sigma: float = 7.0 / 6.0, stability_constant: float = 1.0 / 255.0):
        self.model_path = model_path
        self.window_radius = window_radius
        self.gaussian_sigma = gaussian_sigma
        self.stability_constant = stability_constant

    def fit(self, X=None, y=None):
        self.model_: SvrModel = (
            load_model(self.model_path) if self.model_path else default_model()
        )
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        cfg = BrisqueConfig(
            window_radius=self.window_radius,
            gaussian_sigma=self.gaussian_sigma,
            stability_constant=self.stability_constant,
        )
        return np.array([score(img, self.model_, cfg) for img in _as_image_batch(X)])

    def predict(self, X) -> np.ndarray:
        return self.transform(X)


class FixedBpcerDetector(BaseEstimator):
    """Threshold detector fitted on bona fide detection scores.

    Operates in normalized score space (higher = more bona-fide-like).
    fit() places the threshold at the empirical target-BPCER quantile;
    predict() returns 1 for bona fide, 0 for attack, boundary inclusive.
    """

    def __init__(self, target_bpcer: float = 0.2, source_dataset: str = ""):
        self.target_bpcer = target_bpcer
        self.source_dataset = source_dataset

    def fit(self, X, y=None):
        scores = check_array(X, ensure_2d=False, dtype=np.float64).ravel()
        self.threshold_: DecisionThreshold = threshold_at_bpcer(
            scores, self.target_bpcer, self.source_dataset
        )
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "threshold_")
        scores = check_array(X, ensure_2d=False, dtype=np.float64).ravel()
        return scores - self.threshold_.value

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0.0).astype(int)

    def score(self, X, y=None) -> float:
        """Bona fide acceptance rate on X, i.e. 1 - empirical BPCER."""
        check_is_fitted(self, "threshold_")
        scores = check_array(X, ensure_2d=False, dtype=np.float64).ravel()
        return 1.0 - bpcer(scores, self.threshold_)
