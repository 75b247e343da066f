"""RBF support vector regression scoring head and its plain-text model file.

Model format (whitespace-separated, `#` comment lines allowed):

    brisque-svr 1
    features 36
    gamma <float>
    bias <float>
    scale_min <36 floats>
    scale_max <36 floats>
    support_vectors <count>
    <dual coefficient> <36 floats>     one line per support vector

Any 36-dim model in this format can be loaded, so retrained heads drop in.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..ingest import GrayImage
from .pipeline import BrisqueConfig, features

MAGIC = "brisque-svr"
VERSION = 1


class ModelMismatch(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SvrModel:
    gamma: float
    bias: float
    scale_min: np.ndarray   # (36,)
    scale_max: np.ndarray   # (36,)
    support_vectors: np.ndarray  # (n, 36)
    dual_coefs: np.ndarray  # (n,)

    def __post_init__(self) -> None:
        n_feat = self.scale_min.shape[0]
        if self.scale_max.shape != (n_feat,) or self.support_vectors.shape[1] != n_feat:
            raise ModelMismatch("inconsistent feature dimensionality")
        if self.dual_coefs.shape[0] != self.support_vectors.shape[0]:
            raise ModelMismatch("one dual coefficient per support vector required")
        if np.any(self.scale_min >= self.scale_max):
            raise ModelMismatch("scaling ranges need min < max per feature")
        for arr in (self.scale_min, self.scale_max, self.support_vectors, self.dual_coefs):
            arr.setflags(write=False)

    @property
    def n_features(self) -> int:
        return self.scale_min.shape[0]

    def scale(self, feats: np.ndarray) -> np.ndarray:
        """Min-max map to [-1, 1] per the stored ranges (no clipping)."""
        return -1.0 + 2.0 * (feats - self.scale_min) / (self.scale_max - self.scale_min)

    def predict(self, feats: np.ndarray) -> float:
        if feats.shape != (self.n_features,):
            raise ModelMismatch(f"expected {self.n_features} features, got {feats.shape}")
        x = self.scale(feats)
        sq_dist = np.sum((self.support_vectors - x) ** 2, axis=1)
        return float(self.dual_coefs @ np.exp(-self.gamma * sq_dist) + self.bias)


def score(
    image: GrayImage | np.ndarray,
    model: SvrModel,
    cfg: BrisqueConfig = BrisqueConfig(),
) -> float:
    """Raw quality score of one image; lower means better quality."""
    if model.n_features != 36:
        raise ModelMismatch("scoring expects a 36-feature model")
    return model.predict(features(image, cfg))


def load_model(path: str | Path) -> SvrModel:
    with open(path, encoding="utf-8") as fh:
        tokens: list[str] = []
        for line in fh:
            body = line.split("#", 1)[0]
            tokens.extend(body.split())
    it = iter(tokens)

    def take(expect: str | None = None) -> str:
        try:
            tok = next(it)
        except StopIteration:
            raise ModelFormatError(f"{path}: truncated model file") from None
        if expect is not None and tok != expect:
            raise ModelFormatError(f"{path}: expected {expect!r}, got {tok!r}")
        return tok

    take(MAGIC)
    if int(take()) != VERSION:
        raise ModelFormatError(f"{path}: unsupported model version")
    take("features")
    n_feat = int(take())
    take("gamma")
    gamma = float(take())
    take("bias")
    bias = float(take())
    take("scale_min")
    scale_min = np.array([float(take()) for _ in range(n_feat)])
    take("scale_max")
    scale_max = np.array([float(take()) for _ in range(n_feat)])
    take("support_vectors")
    n_sv = int(take())
    rows = np.array([float(take()) for _ in range(n_sv * (n_feat + 1))]).reshape(n_sv, n_feat + 1)
    return SvrModel(
        gamma=gamma,
        bias=bias,
        scale_min=scale_min,
        scale_max=scale_max,
        support_vectors=rows[:, 1:].copy(),
        dual_coefs=rows[:, 0].copy(),
    )


def dump_model(model: SvrModel, path: str | Path) -> None:
    def fmt(values: np.ndarray) -> str:
        return " ".join(repr(float(v)) for v in values)

    lines = [
        f"{MAGIC} {VERSION}",
        f"features {model.n_features}",
        f"gamma {model.gamma!r}",
        f"bias {model.bias!r}",
        f"scale_min {fmt(model.scale_min)}",
        f"scale_max {fmt(model.scale_max)}",
        f"support_vectors {model.support_vectors.shape[0]}",
    ]
    for coef, sv in zip(model.dual_coefs, model.support_vectors):
        lines.append(f"{float(coef)!r} {fmt(sv)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def default_model() -> SvrModel:
    """The model shipped with the package."""
    ref = resources.files("morphqual.brisque") / "data" / "brisque_svr.txt"
    with resources.as_file(ref) as path:
        return load_model(path)
