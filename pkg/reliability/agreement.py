"""Inter-rater agreement, kappa filtering and label tables."""

import logging
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd
from sklearn.metrics import cohen_kappa_score

from errors import UndefinedStatisticError, ValidationError
from ingest.models import AnnotationSet
from ingest.questionnaire import LIKERT_MAX, LIKERT_MIN
from .scoring import binarize_series, normalize_annotator, score_frame

logger = logging.getLogger(__name__)

CATEGORIES = list(range(LIKERT_MIN, LIKERT_MAX + 1))


def qw_kappa(r1: Sequence[int], r2: Sequence[int], categories: Sequence[int] = CATEGORIES) -> float:
    """Quadratic weighted kappa between two ordinal rating vectors."""
    r1 = np.asarray(r1, dtype=int)
    r2 = np.asarray(r2, dtype=int)
    if r1.shape != r2.shape or r1.size < 2:
        raise ValidationError('kappa needs two rating vectors of equal length >= 2')
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', RuntimeWarning)
        kappa = cohen_kappa_score(r1, r2, labels=list(categories), weights='quadratic')
    if not np.isfinite(kappa):
        raise UndefinedStatisticError('kappa undefined: expected disagreement is zero')
    return float(kappa)


def mean_pairwise_kappa(vectors: Dict[str, np.ndarray]) -> float:
    """Mean kappa over all rater pairs; undefined pairs are skipped."""
    values = []
    for a, b in combinations(sorted(vectors), 2):
        try:
            values.append(qw_kappa(vectors[a], vectors[b]))
        except UndefinedStatisticError:
            logger.debug("kappa undefined for raters %s/%s", a, b)
    return float(np.mean(values)) if values else float('nan')


def sample_kappas(annotations: AnnotationSet) -> pd.Series:
    """Mean pairwise kappa per sample over the raters' item vectors."""
    by_sample: Dict[tuple, Dict[str, np.ndarray]] = {}
    for key, vector in annotations.ratings().items():
        by_sample.setdefault(tuple(key[1:]), {})[key[0]] = vector
    index = pd.MultiIndex.from_tuples(list(by_sample), names=annotations.key_columns)
    values = [mean_pairwise_kappa(v) for v in by_sample.values()]
    series = pd.Series(values, index=index, name='mean_kappa')
    if annotations.level == 'group':
        series.index = series.index.get_level_values(0)
    return series.sort_index()


def filter_by_kappa(kappas: pd.Series, threshold: float = 0.2) -> pd.Series:
    """Kept flag per sample: mean kappa at or above the threshold."""
    kept = kappas >= threshold
    dropped = list(kappas.index[~kept])
    if dropped:
        logger.info("Dropping %d of %d samples with kappa < %.2f", len(dropped), len(kappas), threshold)
    return kept.rename('kept')


@dataclass
class ReliabilityReport:
    """Per-sample reliability and labels of one annotation level."""

    level: str
    samples: pd.DataFrame
    kappa_threshold: float
    binarize_threshold: float
    scores: pd.DataFrame = field(default_factory=pd.DataFrame)

    @property
    def kept(self) -> pd.DataFrame:
        return self.samples[self.samples['kept']]

    @property
    def dropped_ids(self) -> List:
        return list(self.samples.index[~self.samples['kept']])

    def labels(self, column: str = 'label') -> pd.Series:
        """Labels of the kept samples."""
        return self.kept[column]

    def kappa_summary(self) -> Dict[str, float]:
        kappas = self.samples['mean_kappa'].dropna()
        return {
            'n_samples': int(len(self.samples)),
            'n_kept': int(self.samples['kept'].sum()),
            'kappa_mean': float(kappas.mean()) if len(kappas) else float('nan'),
            'kappa_median': float(kappas.median()) if len(kappas) else float('nan'),
            'kappa_min': float(kappas.min()) if len(kappas) else float('nan'),
            'kappa_max': float(kappas.max()) if len(kappas) else float('nan'),
        }

    def scatter_data(self) -> pd.DataFrame:
        """Mean PCQ vs mean kappa per sample, with both thresholds."""
        data = self.samples[['mean_pcq', 'mean_kappa', 'kept']].copy()
        data['kappa_threshold'] = self.kappa_threshold
        data['binarize_threshold'] = self.binarize_threshold
        return data


def reliability_report(
    annotations: AnnotationSet,
    kappa_threshold: float = 0.2,
    binarize_threshold: float = 3.0,
) -> ReliabilityReport:
    """Scores, agreement, filtering and labels for one annotation level.

    Columns of ``samples``: mean_pcq (raw rater mean), normalized_pcq (mean
    of rater-normalized scores), mean_kappa, n_raters, kept, label.
    """
    scores = normalize_annotator(score_frame(annotations))
    keys = annotations.key_columns
    grouped = scores.groupby(keys)
    samples = pd.DataFrame({
        'mean_pcq': grouped['score'].mean(),
        'normalized_pcq': grouped['normalized'].mean(),
        'n_raters': grouped['rater_id'].nunique(),
    })
    samples['mean_kappa'] = sample_kappas(annotations).reindex(samples.index)
    samples['kept'] = filter_by_kappa(samples['mean_kappa'], kappa_threshold)
    samples['label'] = binarize_series(samples['mean_pcq'], binarize_threshold)
    logger.info(
        "%s level: %d samples, %d kept, %d high",
        annotations.level, len(samples), int(samples['kept'].sum()),
        int(samples.loc[samples['kept'], 'label'].sum()),
    )
    return ReliabilityReport(annotations.level, samples, kappa_threshold, binarize_threshold, scores)
