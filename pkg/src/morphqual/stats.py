"""Separability, density, and cross-estimator agreement analytics.

Fisher discriminant ratio between two score populations, Gaussian kernel
density estimates of score distributions, and tail-overlap ratios between
estimators' quality rankings.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import DistributionSummary, NativeOrder, ScoreTable

BANDWIDTH_RULE = "silverman"


class Tail(enum.Enum):
    TOP = "top"
    BOTTOM = "bottom"


class DegenerateSpread(ValueError):
    pass


class SampleSetMismatch(ValueError):
    pass


@dataclass(frozen=True)
class KdeCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    bandwidth_rule: str = BANDWIDTH_RULE

    def __post_init__(self) -> None:
        if self.grid.shape != self.density.shape:
            raise ValueError("grid and density must have equal length")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        self.grid.setflags(write=False)
        self.density.setflags(write=False)

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))


@dataclass(frozen=True)
class OverlapMatrix:
    estimators: tuple[str, ...]
    ratios: np.ndarray
    tail: Tail
    fraction: float

    def __post_init__(self) -> None:
        n = len(self.estimators)
        if self.ratios.shape != (n, n):
            raise ValueError("ratio matrix must be square over the estimators")
        self.ratios.setflags(write=False)


def fdr(a: DistributionSummary, b: DistributionSummary) -> float:
    """Separability of two score distributions: (mu1-mu2)^2/(s1^2+s2^2).

    Symmetric, polarity-invariant, and invariant under common affine maps.
    Degenerate pairs (both stds zero, distinct means) come back as +inf so
    reports can render them explicitly.
    """
    var_sum = a.std**2 + b.std**2
    diff = a.mean - b.mean
    if var_sum == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff**2 / var_sum


def silverman_bandwidth(scores: np.ndarray) -> float:
    n = scores.size
    return 1.06 * float(np.std(scores)) * n ** (-1.0 / 5.0)


def kde(scores, grid_points: int = 512, bandwidth: float | None = None) -> KdeCurve:
    """Gaussian-kernel density over [min - 3h, max + 3h].

    Defaults to the Silverman rule h = 1.06 * std * n^(-1/5). All-equal
    inputs fall back to a delta-like spike with a floored bandwidth rather
    than failing, so degenerate populations still plot.
    """
    x = np.asarray(scores, dtype=np.float64).ravel()
    if x.size < 2:
        raise ValueError("kde needs at least 2 scores")
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    h = bandwidth if bandwidth is not None else silverman_bandwidth(x)
    if h <= 0.0:
        h = 1e-6 * abs(float(x[0])) + 1e-12
    lo, hi = float(x.min()) - 3.0 * h, float(x.max()) + 3.0 * h
    grid = np.linspace(lo, hi, grid_points)
    z = (grid[:, None] - x[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (x.size * h * math.sqrt(2.0 * math.pi))
    return KdeCurve(grid=grid, density=density, bandwidth=h)


def _worst_quality_order(table: ScoreTable) -> list[str]:
    """Sample ids sorted from lowest to highest native quality, ties broken
    by ascending sample_id for run-to-run determinism."""
    sign = 1.0 if table.estimator.native_order is NativeOrder.INCREASING else -1.0
    return sorted(table.entries, key=lambda sid: (sign * table.entries[sid], sid))


def overlap_ratio(a: ScoreTable, b: ScoreTable, fraction: float = 0.1, tail: Tail = Tail.BOTTOM) -> float:
    """Fraction of shared samples in the two estimators' extreme-quality tails.

    Bottom compares the ceil(fraction*N) lowest-quality samples of each
    estimator, Top the highest-quality ones; 'quality' follows each
    estimator's native ordering.
    """
    if not 0.0 < fraction <= 0.5:
        raise ValueError("fraction must be in (0, 0.5]")
    if set(a.entries) != set(b.entries):
        raise SampleSetMismatch(
            f"score tables {a.estimator.name!r} and {b.estimator.name!r} cover different samples"
        )
    n = len(a.entries)
    if n == 0:
        raise SampleSetMismatch("empty score tables")
    k = math.ceil(fraction * n)
    picks = []
    for table in (a, b):
        order = _worst_quality_order(table)
        if tail is Tail.TOP:
            order = _best_quality_order(table)
        picks.append(set(order[:k]))
    return len(picks[0] & picks[1]) / k


def _best_quality_order(table: ScoreTable) -> list[str]:
    sign = -1.0 if table.estimator.native_order is NativeOrder.INCREASING else 1.0
    return sorted(table.entries, key=lambda sid: (sign * table.entries[sid], sid))


def overlap_matrix(tables: list[ScoreTable], fraction: float = 0.1, tail: Tail = Tail.BOTTOM) -> OverlapMatrix:
    """Pairwise tail-overlap ratios; symmetric with a unit diagonal."""
    ordered = sorted(tables, key=lambda t: t.estimator.name)
    n = len(ordered)
    ratios = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            r = overlap_ratio(ordered[i], ordered[j], fraction, tail)
            ratios[i, j] = ratios[j, i] = r
    return OverlapMatrix(
        estimators=tuple(t.estimator.name for t in ordered),
        ratios=ratios,
        tail=tail,
        fraction=fraction,
    )
