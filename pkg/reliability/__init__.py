"""Annotation reliability, construct validity and PCQ labels."""

from .scoring import HIGH, LOW, pcq_score, score_frame, normalize_annotator, binarize, binarize_series
from .agreement import (
    qw_kappa,
    mean_pairwise_kappa,
    sample_kappas,
    filter_by_kappa,
    ReliabilityReport,
    reliability_report,
)
from .validity import ValidityReport, construct_validity_pca, annotation_validity

__all__ = [
    'HIGH',
    'LOW',
    'pcq_score',
    'score_frame',
    'normalize_annotator',
    'binarize',
    'binarize_series',
    'qw_kappa',
    'mean_pairwise_kappa',
    'sample_kappas',
    'filter_by_kappa',
    'ReliabilityReport',
    'reliability_report',
    'ValidityReport',
    'construct_validity_pca',
    'annotation_validity',
]
