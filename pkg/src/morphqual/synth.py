"""Synthetic score-population generator and closed-form separability oracle.

Used both as a fixture factory for end-to-end tests and as an independent
analytic check of the empirical separability / error-rate machinery.
Streams are deterministic per seed (numpy PCG64; the generator name is
recorded in the output metadata).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    DatasetManifest,
    EstimatorDescriptor,
    EstimatorRegistry,
    Label,
    SampleRecord,
    ScoreTable,
)

RNG_ALGORITHM = "numpy-pcg64"


class ZeroVariancePair(ValueError):
    pass


@dataclass(frozen=True)
class Population:
    label: Label
    distribution: str  # normal | uniform | laplace
    params: tuple[float, float]  # (mu, sigma) | (a, b) | (mu, b)
    count: int
    attack_type: str | None = None

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("count must be >= 1")
        kind, (p0, p1) = self.distribution, self.params
        if kind == "normal" and p1 <= 0:
            raise ValueError("normal sigma must be > 0")
        elif kind == "uniform" and p0 >= p1:
            raise ValueError("uniform needs a < b")
        elif kind == "laplace" and p1 <= 0:
            raise ValueError("laplace scale must be > 0")
        elif kind not in ("normal", "uniform", "laplace"):
            raise ValueError(f"unknown distribution {kind!r}")
        if (self.label is Label.ATTACK) != (self.attack_type is not None):
            raise ValueError("attack_type present iff label is attack")

    def variance(self) -> float:
        p0, p1 = self.params
        if self.distribution == "normal":
            return p1**2
        if self.distribution == "uniform":
            return (p1 - p0) ** 2 / 12.0
        return 2.0 * p1**2

    def mean(self) -> float:
        p0, p1 = self.params
        if self.distribution == "uniform":
            return (p0 + p1) / 2.0
        return p0

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        p0, p1 = self.params
        if self.distribution == "normal":
            return rng.normal(p0, p1, self.count)
        if self.distribution == "uniform":
            return rng.uniform(p0, p1, self.count)
        return rng.laplace(p0, p1, self.count)


@dataclass(frozen=True)
class SynthSpec:
    dataset_name: str
    populations: tuple[Population, ...]
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "populations", tuple(self.populations))
        if not self.populations:
            raise ValueError("need at least one population")


def generate(
    spec: SynthSpec, estimator: EstimatorDescriptor
) -> tuple[DatasetManifest, ScoreTable]:
    """Deterministic manifest + score table for one estimator.

    Sample ids are synth-<dataset>-<label or attack_type>-<index> (globally
    unique so multi-dataset fixtures can share one score file); the stream is a
    function of (seed, estimator name) so different estimators get
    independent draws.
    """
    rng = np.random.default_rng(np.random.SeedSequence(
        entropy=spec.seed,
        spawn_key=(_name_key(spec.dataset_name), _name_key(estimator.name)),
    ))
    samples: list[SampleRecord] = []
    entries: dict[str, float] = {}
    for pop in spec.populations:
        tag = pop.attack_type if pop.attack_type else pop.label.value
        values = pop.draw(rng)
        for i, value in enumerate(values):
            sid = f"synth-{spec.dataset_name}-{tag}-{i:06d}"
            samples.append(SampleRecord(sid, pop.label, spec.dataset_name, pop.attack_type))
            entries[sid] = float(value)
    return DatasetManifest(spec.dataset_name, tuple(samples)), ScoreTable(estimator, entries)


def _name_key(name: str) -> int:
    import zlib

    return zlib.crc32(name.encode())


def analytic_fdr(a: Population, b: Population) -> float:
    """Closed-form separability ratio from the distribution parameters."""
    var_sum = a.variance() + b.variance()
    if var_sum == 0.0:
        raise ZeroVariancePair("both populations have zero variance")
    return (a.mean() - b.mean()) ** 2 / var_sum


def load_spec(path: str | Path) -> list[SynthSpec]:
    """Read fixture specs from JSON: a top-level seed plus one entry per
    dataset, each with its populations."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    seed = int(doc["seed"])
    specs = []
    for ds in doc["datasets"]:
        pops = []
        for p in ds["populations"]:
            label = Label(p["label"])
            pops.append(Population(
                label=label,
                distribution=p["distribution"],
                params=(float(p["params"][0]), float(p["params"][1])),
                count=int(p["count"]),
                attack_type=p.get("attack_type"),
            ))
        specs.append(SynthSpec(ds["name"], tuple(pops), seed))
    return specs


def spec_estimators(path: str | Path, registry: EstimatorRegistry) -> list[EstimatorDescriptor]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return [registry.get(name) for name in doc.get("estimators", ["brisque"])]
