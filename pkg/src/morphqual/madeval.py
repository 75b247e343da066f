"""Detection engine: ISO 30107-3 error rates, EER, and threshold transfer.

Decision convention (fixed and documented): a sample is called bona fide
iff its normalized score is >= the threshold. threshold_at_bpcer and bpcer
are mutually consistent under this convention.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from typing import Iterable, Sequence

import numpy as np

from .core import (
    DatasetManifest,
    EmptyPopulation,
    EstimatorRegistry,
    Label,
    ScoreTable,
    normalize_scores,
)
from .ingest import join

MEAN_DATASET = "all"
MEAN_ATTACK = "mean"


@dataclass(frozen=True)
class DecisionThreshold:
    value: float
    source_dataset: str
    target_bpcer: float
    achieved_bpcer: float


@dataclass(frozen=True)
class MetricRow:
    estimator: str
    source_dataset: str
    eval_dataset: str
    attack_type: str
    threshold: float | None  # None on aggregate (mean) rows
    apcer: float
    bpcer: float
    acer: float
    eer: float | None = None


@dataclass
class MetricReport:
    rows: list[MetricRow] = field(default_factory=list)

    def sorted(self) -> "MetricReport":
        key = lambda r: (r.estimator, r.source_dataset, r.eval_dataset, r.attack_type)
        return MetricReport(rows=sorted(self.rows, key=key))

    def to_csv_rows(self) -> list[list[str]]:
        has_eer = any(r.eer is not None for r in self.rows)
        header = ["estimator", "source_dataset", "eval_dataset", "attack_type",
                  "threshold", "apcer", "bpcer", "acer"]
        if has_eer:
            header.append("eer")
        out = [header]
        for r in self.sorted().rows:
            row = [r.estimator, r.source_dataset, r.eval_dataset, r.attack_type,
                   "" if r.threshold is None else repr(r.threshold),
                   repr(r.apcer), repr(r.bpcer), repr(r.acer)]
            if has_eer:
                row.append("" if r.eer is None else repr(r.eer))
            out.append(row)
        return out

    def to_json(self) -> str:
        return json.dumps([asdict(r) for r in self.sorted().rows], indent=2)


def classify(score: float, t: DecisionThreshold) -> Label:
    """Boundary inclusive: score == threshold counts as bona fide."""
    return Label.BONA_FIDE if score >= t.value else Label.ATTACK


def bpcer(bonafide_scores: Sequence[float], t: DecisionThreshold | float) -> float:
    """Fraction of bona fide scores below the threshold."""
    value = t.value if isinstance(t, DecisionThreshold) else t
    scores = np.asarray(bonafide_scores, dtype=np.float64)
    if scores.size == 0:
        raise EmptyPopulation("bpcer needs at least one bona fide score")
    return float(np.count_nonzero(scores < value)) / scores.size


def apcer(attack_scores: Sequence[float], t: DecisionThreshold | float) -> float:
    """Fraction of attack scores at or above the threshold."""
    value = t.value if isinstance(t, DecisionThreshold) else t
    scores = np.asarray(attack_scores, dtype=np.float64)
    if scores.size == 0:
        raise EmptyPopulation("apcer needs at least one attack score")
    return float(np.count_nonzero(scores >= value)) / scores.size


def acer(apcer_value: float, bpcer_value: float) -> float:
    if not (0.0 <= apcer_value <= 1.0 and 0.0 <= bpcer_value <= 1.0):
        raise ValueError("rates must lie in [0, 1]")
    return (apcer_value + bpcer_value) / 2.0


def threshold_at_bpcer(
    bonafide_scores: Sequence[float],
    target: float,
    source_dataset: str = "",
) -> DecisionThreshold:
    """Empirical target-quantile threshold of the bona fide scores.

    Picks the largest observed score whose empirical BPCER stays <= target,
    so achieved_bpcer <= target always; quantization on small sets is
    reported, never hidden.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target BPCER must be in (0, 1)")
    scores = np.sort(np.asarray(bonafide_scores, dtype=np.float64))
    if scores.size == 0:
        raise EmptyPopulation("threshold_at_bpcer needs bona fide scores")
    candidates = np.unique(scores)
    below = np.searchsorted(scores, candidates, side="left") / scores.size
    feasible = np.nonzero(below <= target)[0]
    idx = feasible[-1]  # bpcer(min) == 0, so never empty
    return DecisionThreshold(
        value=float(candidates[idx]),
        source_dataset=source_dataset,
        target_bpcer=target,
        achieved_bpcer=float(below[idx]),
    )


def eer(
    bonafide_scores: Sequence[float],
    attack_scores: Sequence[float],
) -> tuple[float, float]:
    """Equal error rate by exhaustive sweep over all observed scores.

    Returns (eer, threshold) at the candidate minimizing |APCER - BPCER|,
    ties broken toward the lower threshold; the reported rate is the mean
    of the two at that point.
    """
    bona = np.sort(np.asarray(bonafide_scores, dtype=np.float64))
    attack = np.sort(np.asarray(attack_scores, dtype=np.float64))
    if bona.size == 0 or attack.size == 0:
        raise EmptyPopulation("eer needs both populations")
    candidates = np.unique(np.concatenate([bona, attack]))
    # sentinel above the maximum reaches the (BPCER=1, APCER=0) endpoint
    candidates = np.append(candidates, candidates[-1] + 1.0)
    bp = np.searchsorted(bona, candidates, side="left") / bona.size
    ap = 1.0 - np.searchsorted(attack, candidates, side="left") / attack.size
    idx = int(np.argmin(np.abs(ap - bp)))
    return float((ap[idx] + bp[idx]) / 2.0), float(candidates[idx])


def _normalized_tables(
    tables: Iterable[ScoreTable], registry: EstimatorRegistry
) -> list[ScoreTable]:
    """Re-resolve each table's descriptor from the registry (polarity
    authority), then flip to detection orientation."""
    out = []
    for table in tables:
        desc = registry.get(table.estimator.name)
        out.append(normalize_scores(ScoreTable(estimator=desc, entries=table.entries)))
    return sorted(out, key=lambda t: t.estimator.name)


def _population_scores(
    manifest: DatasetManifest, table: ScoreTable, coverage_floor: float
) -> tuple[list[float], dict[str, list[float]]]:
    matched = set(join(manifest, table, coverage_floor).matched)
    bona = [table.entries[sid] for sid in manifest.bona_fide_ids() if sid in matched]
    attacks = {
        at: [table.entries[sid] for sid in manifest.attack_ids(at) if sid in matched]
        for at in manifest.attack_types
    }
    return bona, attacks


def intra_eval(
    manifests: DatasetManifest | Sequence[DatasetManifest],
    tables: Sequence[ScoreTable],
    registry: EstimatorRegistry,
    coverage_floor: float = 1.0,
) -> MetricReport:
    """Per-attack EER with bona fide and attacks of the same dataset, plus a
    per-estimator mean row across all attacks and datasets."""
    if isinstance(manifests, DatasetManifest):
        manifests = [manifests]
    report = MetricReport()
    per_estimator_eers: dict[str, list[float]] = {}
    for table in _normalized_tables(tables, registry):
        name = table.estimator.name
        for manifest in manifests:
            bona, attacks = _population_scores(manifest, table, coverage_floor)
            for attack_type in sorted(attacks):
                rate, threshold = eer(bona, attacks[attack_type])
                ap = apcer(attacks[attack_type], threshold)
                bp = bpcer(bona, threshold)
                report.rows.append(MetricRow(
                    estimator=name,
                    source_dataset=manifest.dataset_name,
                    eval_dataset=manifest.dataset_name,
                    attack_type=attack_type,
                    threshold=threshold,
                    apcer=ap,
                    bpcer=bp,
                    acer=acer(ap, bp),
                    eer=rate,
                ))
                per_estimator_eers.setdefault(name, []).append(rate)
    for name, eers in sorted(per_estimator_eers.items()):
        mean_eer = float(np.mean(eers))
        report.rows.append(MetricRow(
            estimator=name,
            source_dataset=MEAN_DATASET,
            eval_dataset=MEAN_DATASET,
            attack_type=MEAN_ATTACK,
            threshold=None,
            apcer=mean_eer,
            bpcer=mean_eer,
            acer=mean_eer,
            eer=mean_eer,
        ))
    return report.sorted()


def cross_eval(
    manifests: Sequence[DatasetManifest],
    tables: Sequence[ScoreTable],
    registry: EstimatorRegistry,
    target_bpcer: float = 0.2,
    coverage_floor: float = 1.0,
) -> MetricReport:
    """Threshold-transfer protocol: fix the threshold at the target BPCER on
    each source dataset's bona fide scores, then measure BPCER/APCER/ACER on
    every dataset and attack; adds a per-(estimator, source) mean-ACER row."""
    if not manifests:
        raise ValueError("cross_eval needs at least one dataset")
    report = MetricReport()
    for table in _normalized_tables(tables, registry):
        name = table.estimator.name
        populations = {
            m.dataset_name: _population_scores(m, table, coverage_floor) for m in manifests
        }
        for source in manifests:
            src_bona, _ = populations[source.dataset_name]
            t = threshold_at_bpcer(src_bona, target_bpcer, source.dataset_name)
            apcers: list[float] = []
            bpcers: list[float] = []
            for target_ds in manifests:
                bona, attacks = populations[target_ds.dataset_name]
                bp = bpcer(bona, t)
                for attack_type in sorted(attacks):
                    ap = apcer(attacks[attack_type], t)
                    report.rows.append(MetricRow(
                        estimator=name,
                        source_dataset=source.dataset_name,
                        eval_dataset=target_ds.dataset_name,
                        attack_type=attack_type,
                        threshold=t.value,
                        apcer=ap,
                        bpcer=bp,
                        acer=acer(ap, bp),
                    ))
                    apcers.append(ap)
                    bpcers.append(bp)
            # mean ACER over all (dataset, attack) cells; computed from the
            # mean rates so the acer identity holds for this row too
            mean_ap, mean_bp = float(np.mean(apcers)), float(np.mean(bpcers))
            report.rows.append(MetricRow(
                estimator=name,
                source_dataset=source.dataset_name,
                eval_dataset=MEAN_DATASET,
                attack_type=MEAN_ATTACK,
                threshold=t.value,
                apcer=mean_ap,
                bpcer=mean_bp,
                acer=acer(mean_ap, mean_bp),
            ))
    return report.sorted()
