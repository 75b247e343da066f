"""Quality-based morphing attack detection toolkit.

Computes no-reference image quality scores (built-in BRISQUE plus ingested
score tables), quantifies bona fide / attack separability, and runs intra-
and cross-dataset detection protocols with ISO 30107-3 error metrics.
"""

__version__ = "0.1.0"

from .core import (
    DatasetManifest,
    DistributionSummary,
    EstimatorDescriptor,
    EstimatorFamily,
    Label,
    MadPolarity,
    NativeOrder,
    SampleRecord,
    ScoreTable,
    default_registry,
    normalize_scores,
    summarize,
)
from .madeval import (
    DecisionThreshold,
    MetricReport,
    acer,
    apcer,
    bpcer,
    classify,
    cross_eval,
    eer,
    intra_eval,
    threshold_at_bpcer,
)
from .stats import KdeCurve, OverlapMatrix, fdr, kde, overlap_ratio
from .estimators import BrisqueFeatureExtractor, BrisqueScorer, FixedBpcerDetector

__all__ = [
    "BrisqueFeatureExtractor",
    "BrisqueScorer",
    "DatasetManifest",
    "DecisionThreshold",
    "DistributionSummary",
    "EstimatorDescriptor",
    "EstimatorFamily",
    "FixedBpcerDetector",
    "KdeCurve",
    "Label",
    "MadPolarity",
    "MetricReport",
    "NativeOrder",
    "OverlapMatrix",
    "SampleRecord",
    "ScoreTable",
    "acer",
    "apcer",
    "bpcer",
    "classify",
    "cross_eval",
    "default_registry",
    "eer",
    "fdr",
    "intra_eval",
    "kde",
    "normalize_scores",
    "overlap_ratio",
    "summarize",
    "threshold_at_bpcer",
]
