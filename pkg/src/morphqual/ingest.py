"""Loading and validation of manifests, score files, and images.

File formats (UTF-8 CSV, header required, `#` lines ignored):

    manifest:  sample_id,path,label,attack_type,dataset
    scores:    estimator,sample_id,score

Image paths in a manifest are relative to the manifest's directory.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import (
    DatasetManifest,
    EstimatorRegistry,
    Label,
    SampleRecord,
    ScoreTable,
)

MANIFEST_HEADER = ["sample_id", "path", "label", "attack_type", "dataset"]
SCORE_HEADER = ["estimator", "sample_id", "score"]

# BT.601 luma weights; fixed so grayscale conversion is reproducible bit-for-bit.
_LUMA = np.array([0.299, 0.587, 0.114])


class IngestError(Exception):
    """Base class for all loading/validation failures."""


class ParseError(IngestError):
    def __init__(self, path: Path | str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


class DuplicateSample(IngestError):
    pass


class EmptyBonaFide(IngestError):
    pass


class UnknownEstimator(IngestError):
    pass


class NonFiniteScore(IngestError):
    pass


class DecodeError(IngestError):
    pass


class UnsupportedFormat(IngestError):
    pass


class CoverageBelowFloor(IngestError):
    pass


@dataclass(frozen=True)
class GrayImage:
    """Row-major luminance grid with values in [0, 1]."""

    pixels: np.ndarray  # float64, shape (height, width)

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise ValueError("pixels must be a non-empty 2-d array")
        if not np.all(np.isfinite(px)):
            raise ValueError("pixels must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("pixels must lie in [0, 1]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class CoverageReport:
    matched: tuple[str, ...]
    manifest_only: tuple[str, ...]
    score_only: tuple[str, ...]

    @property
    def coverage(self) -> float:
        total = len(self.matched) + len(self.manifest_only)
        return 1.0 if total == 0 else len(self.matched) / total


def _read_rows(path: Path, expected_header: list[str]) -> list[tuple[int, list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            raw = [(i + 1, line) for i, line in enumerate(fh) if not line.startswith("#")]
    except OSError as exc:
        raise IngestError(f"{path}: {exc}") from exc
    if not raw:
        raise ParseError(path, 1, "empty file")
    numbered = list(zip([n for n, _ in raw], csv.reader(line for _, line in raw)))
    header_line, header = numbered[0]
    if [h.strip().lower() for h in header] != expected_header:
        raise ParseError(path, header_line, f"expected header {','.join(expected_header)}")
    return numbered[1:]


def load_manifest(path: str | Path) -> tuple[DatasetManifest, dict[str, Path]]:
    """Parse a manifest CSV; returns the manifest and a sample_id -> image
    path map (paths resolved against the manifest's directory)."""
    path = Path(path)
    base = path.parent
    samples: list[SampleRecord] = []
    paths: dict[str, Path] = {}
    seen: set[str] = set()
    dataset_name: str | None = None
    for lineno, row in _read_rows(path, MANIFEST_HEADER):
        if len(row) != 5:
            raise ParseError(path, lineno, f"expected 5 fields, got {len(row)}")
        sid, rel, label_s, attack, dataset = (f.strip() for f in row)
        if sid in seen:
            raise DuplicateSample(f"{path}:{lineno}: duplicate sample_id {sid!r}")
        seen.add(sid)
        try:
            label = Label(label_s.lower())
        except ValueError:
            raise ParseError(path, lineno, f"label must be bonafide or attack, got {label_s!r}")
        if label is Label.ATTACK and not attack:
            raise ParseError(path, lineno, f"attack sample {sid!r} is missing attack_type")
        if label is Label.BONA_FIDE and attack:
            raise ParseError(path, lineno, f"bona fide sample {sid!r} must not have attack_type")
        if dataset_name is None:
            dataset_name = dataset
        elif dataset != dataset_name:
            raise ParseError(path, lineno, f"mixed dataset names {dataset_name!r} and {dataset!r}")
        samples.append(SampleRecord(sid, label, dataset, attack or None))
        paths[sid] = base / rel
    if dataset_name is None:
        raise ParseError(path, 1, "no sample rows")
    if not any(s.label is Label.BONA_FIDE for s in samples):
        raise EmptyBonaFide(f"{path}: manifest contains no bona fide samples")
    return DatasetManifest(dataset_name, tuple(samples)), paths


def dump_manifest(manifest: DatasetManifest, paths: dict[str, Path], path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for s in manifest.samples:
            rel = paths.get(s.sample_id, Path(s.sample_id))
            writer.writerow([s.sample_id, str(rel), s.label.value, s.attack_type or "", s.dataset])


def load_scores(path: str | Path, registry: EstimatorRegistry) -> list[ScoreTable]:
    """Read a score CSV into one ScoreTable per estimator present."""
    path = Path(path)
    per_estimator: dict[str, dict[str, float]] = {}
    for lineno, row in _read_rows(path, SCORE_HEADER):
        if len(row) != 3:
            raise ParseError(path, lineno, f"expected 3 fields, got {len(row)}")
        name, sid, score_s = (f.strip() for f in row)
        if name not in registry:
            raise UnknownEstimator(f"{path}:{lineno}: unknown estimator {name!r}")
        try:
            score = float(score_s)
        except ValueError:
            raise NonFiniteScore(f"{path}:{lineno}: unparseable score {score_s!r}")
        if not math.isfinite(score):
            raise NonFiniteScore(f"{path}:{lineno}: non-finite score {score_s!r}")
        bucket = per_estimator.setdefault(registry.get(name).name, {})
        if sid in bucket:
            raise DuplicateSample(f"{path}:{lineno}: duplicate score for {sid!r} / {name!r}")
        bucket[sid] = score
    return [
        ScoreTable(estimator=registry.get(name), entries=entries)
        for name, entries in sorted(per_estimator.items())
    ]


def dump_scores(tables: list[ScoreTable], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORE_HEADER)
        for table in tables:
            for sid in sorted(table.entries):
                writer.writerow([table.estimator.name, sid, repr(table.entries[sid])])


def load_image(path: str | Path) -> GrayImage:
    """Decode a PNG/JPEG and convert to BT.601 luminance in [0, 1]."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.format not in ("PNG", "JPEG"):
                raise UnsupportedFormat(f"{path}: unsupported format {img.format}")
            arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    except UnidentifiedImageError as exc:
        raise DecodeError(f"{path}: cannot decode image") from exc
    except OSError as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    return GrayImage(pixels=arr @ _LUMA)


def join(
    manifest: DatasetManifest,
    table: ScoreTable,
    coverage_floor: float = 1.0,
) -> CoverageReport:
    """Partition sample_ids into matched / manifest-only / score-only sets.

    Raises CoverageBelowFloor when fewer than `coverage_floor` of the
    manifest's samples have scores; the strict default refuses any missing
    sample because silent drops would corrupt error-rate denominators.
    """
    manifest_ids = {s.sample_id for s in manifest.samples}
    score_ids = set(table.entries)
    report = CoverageReport(
        matched=tuple(sorted(manifest_ids & score_ids)),
        manifest_only=tuple(sorted(manifest_ids - score_ids)),
        score_only=tuple(sorted(score_ids - manifest_ids)),
    )
    if report.coverage < coverage_floor:
        missing = ", ".join(report.manifest_only[:5])
        raise CoverageBelowFloor(
            f"dataset {manifest.dataset_name!r} x estimator {table.estimator.name!r}: "
            f"coverage {report.coverage:.4f} below floor {coverage_floor:.4f} "
            f"(missing e.g. {missing})"
        )
    return report
