"""Scoring: MCQ answer parsing, metrics, reports, probes, audit files."""

from .hallucination import (
    EventTimeline,
    HallucinationReport,
    hallucination_report,
    top_classes,
)
from .mcq import (
    FAILURE_CATEGORIES,
    McqParse,
    edit_distance,
    normalize,
    parse_mcq_answer,
    strip_option_marker,
)
from .metrics import (
    BLEU_EPSILON,
    ClassificationMetrics,
    bleu4,
    classification_metrics,
)
from .noise import NoiseProbeResult, noise_ablation
from .report import (
    MetricReport,
    evaluate_predictions,
    load_predictions,
    row_id,
    save_predictions,
)

__all__ = [
    "BLEU_EPSILON",
    "ClassificationMetrics",
    "EventTimeline",
    "FAILURE_CATEGORIES",
    "HallucinationReport",
    "McqParse",
    "MetricReport",
    "NoiseProbeResult",
    "bleu4",
    "classification_metrics",
    "edit_distance",
    "evaluate_predictions",
    "hallucination_report",
    "load_predictions",
    "noise_ablation",
    "normalize",
    "parse_mcq_answer",
    "row_id",
    "save_predictions",
    "strip_option_marker",
    "top_classes",
]
