import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from morphqual.core import (
    DatasetManifest,
    EstimatorDescriptor,
    EstimatorFamily,
    Label,
    MadPolarity,
    NativeOrder,
    SampleRecord,
    ScoreTable,
    default_registry,
)

DATA_DIR = Path(__file__).parent / "data"
REFERENCE_IMAGES = sorted(DATA_DIR.glob("ref_*.png"))


@pytest.fixture
def registry():
    return default_registry()


@pytest.fixture
def magface(registry):
    return registry.get("magface")


@pytest.fixture
def cnniqa(registry):
    return registry.get("cnniqa")


def make_dataset(name, bona_scores, attack_scores_by_type, estimator):
    """Manifest + score table from raw score arrays."""
    samples, entries = [], {}
    for i, score in enumerate(bona_scores):
        sid = f"{name}-bf-{i:05d}"
        samples.append(SampleRecord(sid, Label.BONA_FIDE, name))
        entries[sid] = float(score)
    for attack_type, scores in attack_scores_by_type.items():
        for i, score in enumerate(scores):
            sid = f"{name}-{attack_type}-{i:05d}"
            samples.append(SampleRecord(sid, Label.ATTACK, name, attack_type))
            entries[sid] = float(score)
    return DatasetManifest(name, tuple(samples)), ScoreTable(estimator, entries)


@pytest.fixture
def plain_estimator():
    return EstimatorDescriptor(
        "magface", EstimatorFamily.FIQA, NativeOrder.INCREASING, MadPolarity.BONA_FIDE_HIGH
    )


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)
