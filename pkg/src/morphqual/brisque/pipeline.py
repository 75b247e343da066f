"""Natural-scene-statistics feature pipeline.

Stages: local mean/variance normalization of luminance (MSCN), neighboring
coefficient products in four orientations, and (asymmetric) generalized
Gaussian moment-matching fits. Run at two scales this yields the 36-feature
vector consumed by the SVR scoring head.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d
from scipy.special import gamma as _gamma

from ..ingest import GrayImage


class ImageTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class BrisqueConfig:
    window_radius: int = 3
    gaussian_sigma: float = 7.0 / 6.0
    # Stabilizer of the canonical method is 1 on a 0-255 scale; pixels here
    # live in [0,1], so the default is rescaled accordingly.
    stability_constant: float = 1.0 / 255.0
    scales: int = 2

    def __post_init__(self) -> None:
        if self.window_radius < 1:
            raise ValueError("window_radius must be >= 1")
        if self.gaussian_sigma <= 0:
            raise ValueError("gaussian_sigma must be > 0")
        if self.stability_constant <= 0:
            raise ValueError("stability_constant must be > 0")
        if self.scales != 2:
            raise ValueError("pipeline is fixed at 2 scales")


@dataclass(frozen=True)
class GgdFit:
    alpha: float
    sigma_sq: float
    degenerate: bool = False


@dataclass(frozen=True)
class AggdFit:
    eta: float
    nu: float
    sigma_l_sq: float
    sigma_r_sq: float
    degenerate: bool = False


_GRID_LO, _GRID_HI, _GRID_STEP = 0.2, 10.0, 0.001


@functools.lru_cache(maxsize=1)
def _shape_grid() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Shape-parameter grid with its gamma-ratio lookups, computed once."""
    g = np.arange(_GRID_LO, _GRID_HI + _GRID_STEP / 2, _GRID_STEP)
    g1, g2, g3 = _gamma(1.0 / g), _gamma(2.0 / g), _gamma(3.0 / g)
    ggd_ratio = g1 * g3 / g2**2          # E[x^2]/E[|x|]^2 for a GGD
    aggd_ratio = g2**2 / (g1 * g3)       # E[|x|]^2/E[x^2] analogue, asymmetric fit
    return g, ggd_ratio, aggd_ratio, g1, g2


def _gaussian_kernel(radius: int, sigma: float) -> np.ndarray:
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    return k / k.sum()


def _local_blur(field: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    out = correlate1d(field, kernel, axis=0, mode="reflect")
    return correlate1d(out, kernel, axis=1, mode="reflect")


def mscn(image: GrayImage | np.ndarray, cfg: BrisqueConfig = BrisqueConfig()) -> np.ndarray:
    """Mean-subtracted contrast-normalized coefficients.

    (I - mu) / (sigma + C) with Gaussian-weighted local moments computed by
    separable convolution under symmetric (reflect) boundary handling.
    """
    px = image.pixels if isinstance(image, GrayImage) else np.asarray(image, dtype=np.float64)
    size = 2 * cfg.window_radius + 1
    if px.shape[0] < size or px.shape[1] < size:
        raise ImageTooSmall(f"image {px.shape} smaller than {size}x{size} window")
    kernel = _gaussian_kernel(cfg.window_radius, cfg.gaussian_sigma)
    mu = _local_blur(px, kernel)
    # max() guards tiny negative round-off in E[I^2] - E[I]^2
    var = np.maximum(_local_blur(px * px, kernel) - mu * mu, 0.0)
    return (px - mu) / (np.sqrt(var) + cfg.stability_constant)


def paired_products(field: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Products of horizontally, vertically, and diagonally adjacent
    coefficients; each output shrinks by one along its paired axis."""
    c = np.asarray(field, dtype=np.float64)
    if c.shape[0] < 2 or c.shape[1] < 2:
        raise ImageTooSmall("paired products need at least a 2x2 field")
    horiz = c[:, :-1] * c[:, 1:]
    vert = c[:-1, :] * c[1:, :]
    diag_main = c[:-1, :-1] * c[1:, 1:]
    diag_anti = c[:-1, 1:] * c[1:, :-1]
    return horiz, vert, diag_main, diag_anti


def fit_ggd(samples: np.ndarray) -> GgdFit:
    """Moment-matching generalized Gaussian fit over the precomputed grid."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    second = float(np.mean(x * x))
    if second == 0.0:
        return GgdFit(alpha=_GRID_HI, sigma_sq=0.0, degenerate=True)
    grid, ggd_ratio, _, _, _ = _shape_grid()
    rho = second / float(np.mean(np.abs(x))) ** 2
    alpha = float(grid[np.argmin(np.abs(ggd_ratio - rho))])
    return GgdFit(alpha=alpha, sigma_sq=second)


def fit_aggd(samples: np.ndarray) -> AggdFit:
    """Asymmetric generalized Gaussian fit via left/right second moments."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    neg, pos = x[x < 0], x[x > 0]
    # one-sided input: the empty side's moment is treated as 0
    left_sq = float(np.mean(neg * neg)) if neg.size else 0.0
    right_sq = float(np.mean(pos * pos)) if pos.size else 0.0
    if left_sq == 0.0 and right_sq == 0.0:
        return AggdFit(eta=0.0, nu=_GRID_HI, sigma_l_sq=0.0, sigma_r_sq=0.0, degenerate=True)
    sigma_l, sigma_r = np.sqrt(left_sq), np.sqrt(right_sq)
    gamma_hat = sigma_l / sigma_r if sigma_r > 0 else np.inf
    r_hat = float(np.mean(np.abs(x))) ** 2 / float(np.mean(x * x))
    if np.isinf(gamma_hat):
        r_hat_norm = 0.0
    else:
        r_hat_norm = r_hat * (gamma_hat**3 + 1) * (gamma_hat + 1) / (gamma_hat**2 + 1) ** 2
    grid, _, aggd_ratio, g1, g2 = _shape_grid()
    idx = int(np.argmin((aggd_ratio - r_hat_norm) ** 2))
    nu = float(grid[idx])
    g3 = _gamma(3.0 / nu)
    # scale estimates rescaled to the AGGD parameterization before taking
    # the mean offset
    const = np.sqrt(g1[idx] / g3)
    eta = (sigma_r - sigma_l) * const * (g2[idx] / g1[idx])
    return AggdFit(eta=float(eta), nu=nu, sigma_l_sq=left_sq, sigma_r_sq=right_sq)


def _downsample_box2(px: np.ndarray) -> np.ndarray:
    h, w = (px.shape[0] // 2) * 2, (px.shape[1] // 2) * 2
    c = px[:h, :w]
    return 0.25 * (c[0::2, 0::2] + c[0::2, 1::2] + c[1::2, 0::2] + c[1::2, 1::2])


def _scale_features(px: np.ndarray, cfg: BrisqueConfig) -> list[float]:
    coeffs = mscn(px, cfg)
    g = fit_ggd(coeffs)
    out = [g.alpha, g.sigma_sq]
    for prod in paired_products(coeffs):
        a = fit_aggd(prod)
        out.extend([a.eta, a.nu, a.sigma_l_sq, a.sigma_r_sq])
    return out


def features(image: GrayImage | np.ndarray, cfg: BrisqueConfig = BrisqueConfig()) -> np.ndarray:
    """36-dim feature vector: 18 per scale, full resolution then a 2x2
    box-averaged half resolution."""
    px = image.pixels if isinstance(image, GrayImage) else np.asarray(image, dtype=np.float64)
    out = _scale_features(px, cfg)
    out.extend(_scale_features(_downsample_box2(px), cfg))
    return np.array(out, dtype=np.float64)
