#!/usr/bin/env python3
"""Train the packaged SVR scoring head.

Builds a degradation corpus from bundled scikit-image photos (Gaussian
blur, additive noise, JPEG recompression at several severities), extracts
the 36 natural-scene-statistics features, fits an RBF SVR against the
severity level, and writes the model in the package's plain-text format.

Run from the repo root:  python3 scripts/train_brisque_model.py
"""

import io
import sys
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter
from skimage import data
from sklearn.svm import SVR

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from morphqual.brisque.model import SvrModel, dump_model, load_model  # noqa: E402
from morphqual.brisque.pipeline import features  # noqa: E402

LUMA = np.array([0.299, 0.587, 0.114])

TRAIN_PHOTOS = ["astronaut", "camera", "coffee", "chelsea", "coins",
                "moon", "page", "grass", "brick", "gravel", "text"]


def to_gray(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3:
        arr = arr[..., :3] @ LUMA
    return arr / 255.0


def jpeg_roundtrip(gray: np.ndarray, quality: int) -> np.ndarray:
    img = Image.fromarray((gray * 255.0).round().astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="JPEG", quality=quality)
    buf.seek(0)
    return np.asarray(Image.open(buf), dtype=np.float64) / 255.0


def degradations(gray: np.ndarray, rng: np.random.Generator):
    """(image, severity in [0, 100]) pairs for one source photo."""
    yield gray, 0.0
    for sigma, sev in [(0.6, 15), (1.2, 35), (2.0, 55), (3.5, 75), (6.0, 95)]:
        yield gaussian_filter(gray, sigma, mode="reflect"), float(sev)
    for noise, sev in [(0.01, 15), (0.03, 35), (0.06, 55), (0.12, 75), (0.25, 95)]:
        noisy = np.clip(gray + rng.normal(0.0, noise, gray.shape), 0.0, 1.0)
        yield noisy, float(sev)
    for quality, sev in [(80, 15), (50, 35), (30, 55), (15, 75), (5, 95)]:
        yield jpeg_roundtrip(gray, quality), float(sev)
    # mixed distortions round out the feature space
    for sigma, noise, quality, sev in [(0.8, 0.02, 60, 40), (1.5, 0.05, 25, 70),
                                       (3.0, 0.1, 10, 100)]:
        mixed = gaussian_filter(gray, sigma, mode="reflect")
        mixed = np.clip(mixed + rng.normal(0.0, noise, gray.shape), 0.0, 1.0)
        yield jpeg_roundtrip(mixed, quality), float(sev)


def tiles(gray: np.ndarray, size: int = 224):
    h, w = gray.shape
    for i in range(0, h - size + 1, size):
        for j in range(0, w - size + 1, size):
            yield gray[i:i + size, j:j + size]
    if h >= size and w >= size:
        yield gray[(h - size) // 2:(h - size) // 2 + size,
                   (w - size) // 2:(w - size) // 2 + size]


def main() -> None:
    rng = np.random.default_rng(20240817)
    feats, targets = [], []
    for name in TRAIN_PHOTOS:
        gray = to_gray(getattr(data, name)())
        for tile in tiles(gray):
            for degraded, severity in degradations(tile, rng):
                feats.append(features(degraded))
                targets.append(severity)
    X = np.vstack(feats)
    y = np.array(targets)
    print(f"corpus: {X.shape[0]} samples from {len(TRAIN_PHOTOS)} photos")

    lo, hi = X.min(axis=0), X.max(axis=0)
    span = np.where(hi - lo == 0, 1.0, hi - lo)
    hi = lo + span
    X_scaled = -1.0 + 2.0 * (X - lo) / span

    svr = SVR(kernel="rbf", C=100.0, gamma=0.05, epsilon=2.0)
    svr.fit(X_scaled, y)
    print(f"support vectors: {svr.support_vectors_.shape[0]}, "
          f"train MAE: {np.abs(svr.predict(X_scaled) - y).mean():.2f}")

    model = SvrModel(
        gamma=0.05,
        bias=float(svr.intercept_[0]),
        scale_min=lo.copy(),
        scale_max=hi.copy(),
        support_vectors=svr.support_vectors_.copy(),
        dual_coefs=svr.dual_coef_.ravel().copy(),
    )
    out = Path(__file__).resolve().parents[1] / "src" / "morphqual" / "brisque" / "data"
    out.mkdir(parents=True, exist_ok=True)
    dump_model(model, out / "brisque_svr.txt")
    reloaded = load_model(out / "brisque_svr.txt")
    check = abs(reloaded.predict(X[0]) - model.predict(X[0]))
    print(f"round-trip prediction delta: {check:.3e}")
    print(f"wrote {out / 'brisque_svr.txt'}")


if __name__ == "__main__":
    main()
