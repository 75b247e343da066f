"""Shared domain types: estimators, samples, score tables, summaries.

Everything here is immutable after construction and free of I/O. Score
polarity handling lives in this module only: downstream metric code always
consumes normalized scores where higher means more bona-fide-like.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


class EstimatorFamily(enum.Enum):
    FIQA = "fiqa"
    IQA = "iqa"


class NativeOrder(enum.Enum):
    """Direction of the raw quality score: higher-is-better or lower-is-better."""

    INCREASING = "increasing"
    DECREASING = "decreasing"


class MadPolarity(enum.Enum):
    """Which population is expected to get the higher score when the raw
    quality value is reused as a detection score."""

    BONA_FIDE_HIGH = "bonafide_high"
    BONA_FIDE_LOW = "bonafide_low"


class Label(enum.Enum):
    BONA_FIDE = "bonafide"
    ATTACK = "attack"


class EmptyPopulation(ValueError):
    pass


@dataclass(frozen=True)
class EstimatorDescriptor:
    name: str
    family: EstimatorFamily
    native_order: NativeOrder
    mad_polarity: MadPolarity
    normalized: bool = False

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("estimator name must be non-empty")

    def flipped(self) -> "EstimatorDescriptor":
        """Same estimator with the opposite detection polarity."""
        other = (
            MadPolarity.BONA_FIDE_LOW
            if self.mad_polarity is MadPolarity.BONA_FIDE_HIGH
            else MadPolarity.BONA_FIDE_HIGH
        )
        return EstimatorDescriptor(
            self.name, self.family, self.native_order, other, self.normalized
        )


@dataclass(frozen=True)
class SampleRecord:
    sample_id: str
    label: Label
    dataset: str
    attack_type: str | None = None

    def __post_init__(self) -> None:
        if not self.sample_id:
            raise ValueError("sample_id must be non-empty")
        if self.label is Label.ATTACK and not self.attack_type:
            raise ValueError(f"attack sample {self.sample_id!r} needs an attack_type")
        if self.label is Label.BONA_FIDE and self.attack_type:
            raise ValueError(f"bona fide sample {self.sample_id!r} must not carry an attack_type")


@dataclass(frozen=True)
class ScoreTable:
    """Per-sample raw scores of one estimator. Rejects non-finite entries."""

    estimator: EstimatorDescriptor
    entries: Mapping[str, float]

    def __post_init__(self) -> None:
        frozen = dict(self.entries)
        for sid, score in frozen.items():
            if not math.isfinite(score):
                raise ValueError(f"non-finite score for sample {sid!r}: {score}")
        object.__setattr__(self, "entries", frozen)

    def __len__(self) -> int:
        return len(self.entries)

    def scores_for(self, sample_ids: Iterable[str]) -> list[float]:
        return [self.entries[sid] for sid in sample_ids]


@dataclass(frozen=True)
class DatasetManifest:
    dataset_name: str
    samples: tuple[SampleRecord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        if not any(s.label is Label.BONA_FIDE for s in self.samples):
            raise ValueError(f"dataset {self.dataset_name!r} has no bona fide samples")
        seen: set[str] = set()
        for s in self.samples:
            if s.sample_id in seen:
                raise ValueError(f"duplicate sample_id {s.sample_id!r}")
            seen.add(s.sample_id)

    @property
    def attack_types(self) -> tuple[str, ...]:
        out: list[str] = []
        for s in self.samples:
            if s.attack_type is not None and s.attack_type not in out:
                out.append(s.attack_type)
        return tuple(out)

    def bona_fide_ids(self) -> list[str]:
        return [s.sample_id for s in self.samples if s.label is Label.BONA_FIDE]

    def attack_ids(self, attack_type: str) -> list[str]:
        return [s.sample_id for s in self.samples if s.attack_type == attack_type]


@dataclass(frozen=True)
class DistributionSummary:
    """Mean/std/count of one score population (population-std convention)."""

    mean: float
    std: float
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.std < 0:
            raise ValueError("std must be >= 0")


def summarize(scores: Sequence[float]) -> DistributionSummary:
    """Two-pass mean and population standard deviation (divide by N)."""
    n = len(scores)
    if n == 0:
        raise EmptyPopulation("cannot summarize an empty score list")
    mean = math.fsum(scores) / n
    var = math.fsum((x - mean) ** 2 for x in scores) / n
    return DistributionSummary(mean=mean, std=math.sqrt(var), count=n)


def normalize_scores(table: ScoreTable) -> ScoreTable:
    """Flip raw scores so higher always means more bona-fide-like.

    Negates every entry iff the estimator's detection polarity is
    bona-fide-low. Applying it twice with the polarity flipped in between
    restores the original table.
    """
    desc = table.estimator
    if desc.mad_polarity is MadPolarity.BONA_FIDE_LOW:
        entries = {sid: -v for sid, v in table.entries.items()}
    else:
        entries = dict(table.entries)
    marked = EstimatorDescriptor(
        desc.name, desc.family, desc.native_order, desc.mad_polarity, normalized=True
    )
    return ScoreTable(estimator=marked, entries=entries)


# The ten measures the toolkit knows out of the box. rankIQ, DBCNN, CNNIQA
# and dipIQ are used inverted as detection scores (bona fide scores lower);
# the rest keep their native direction.
_DEFAULT_ESTIMATORS: tuple[tuple[str, EstimatorFamily, NativeOrder, MadPolarity], ...] = (
    ("magface", EstimatorFamily.FIQA, NativeOrder.INCREASING, MadPolarity.BONA_FIDE_HIGH),
    ("sdd-fiqa", EstimatorFamily.FIQA, NativeOrder.INCREASING, MadPolarity.BONA_FIDE_HIGH),
    ("ser-fiq", EstimatorFamily.FIQA, NativeOrder.INCREASING, MadPolarity.BONA_FIDE_HIGH),
    ("faceqnet", EstimatorFamily.FIQA, NativeOrder.INCREASING, MadPolarity.BONA_FIDE_HIGH),
    ("rankiq", EstimatorFamily.FIQA, NativeOrder.INCREASING, MadPolarity.BONA_FIDE_LOW),
    ("brisque", EstimatorFamily.IQA, NativeOrder.DECREASING, MadPolarity.BONA_FIDE_HIGH),
    ("dbcnn", EstimatorFamily.IQA, NativeOrder.INCREASING, MadPolarity.BONA_FIDE_LOW),
    ("cnniqa", EstimatorFamily.IQA, NativeOrder.DECREASING, MadPolarity.BONA_FIDE_LOW),
    ("unique", EstimatorFamily.IQA, NativeOrder.INCREASING, MadPolarity.BONA_FIDE_HIGH),
    ("dipiq", EstimatorFamily.IQA, NativeOrder.INCREASING, MadPolarity.BONA_FIDE_LOW),
)


@dataclass
class EstimatorRegistry:
    """Name -> descriptor lookup; names are matched case-insensitively."""

    _by_name: dict[str, EstimatorDescriptor] = field(default_factory=dict)

    def register(self, desc: EstimatorDescriptor) -> None:
        key = desc.name.lower()
        if key in self._by_name:
            raise ValueError(f"estimator {desc.name!r} already registered")
        self._by_name[key] = desc

    def get(self, name: str) -> EstimatorDescriptor:
        try:
            return self._by_name[name.lower()]
        except KeyError:
            raise KeyError(f"unknown estimator {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name.lower() in self._by_name

    def names(self) -> list[str]:
        return sorted(self._by_name)

    def content_hash(self) -> str:
        import hashlib

        blob = ";".join(
            f"{d.name}:{d.family.value}:{d.native_order.value}:{d.mad_polarity.value}"
            for d in (self._by_name[k] for k in sorted(self._by_name))
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def default_registry() -> EstimatorRegistry:
    reg = EstimatorRegistry()
    for name, family, order, polarity in _DEFAULT_ESTIMATORS:
        reg.register(EstimatorDescriptor(name, family, order, polarity))
    return reg
