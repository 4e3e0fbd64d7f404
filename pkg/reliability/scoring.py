"""PCQ scalar scores, annotator normalization and label binarization."""

import logging
from typing import Sequence

import numpy as np
import pandas as pd

from errors import ValidationError
from ingest.models import AnnotationSet
from ingest.questionnaire import LIKERT_MAX, LIKERT_MIN

logger = logging.getLogger(__name__)

HIGH = 'high'
LOW = 'low'


def pcq_score(ratings: Sequence[float], negative: Sequence[bool]) -> float:
    """Mean item rating after reverse-coding negatively oriented items.

    Args:
        ratings: One rating per item on the 1..5 scale
        negative: Orientation flag per item

    Returns:
        PCQ score in [1, 5]
    """
    values = np.asarray(ratings, dtype=float)
    flags = np.asarray(negative, dtype=bool)
    if values.shape != flags.shape:
        raise ValidationError(f"expected {flags.size} item ratings, got {values.size}")
    if np.isnan(values).any():
        raise ValidationError('every item must be rated')
    recoded = np.where(flags, LIKERT_MIN + LIKERT_MAX - values, values)
    return float(recoded.mean())


def score_frame(annotations: AnnotationSet) -> pd.DataFrame:
    """One PCQ score per rating row: rater_id, sample keys and ``score``."""
    keys = ['rater_id'] + annotations.key_columns
    items = annotations.frame[annotations.item_ids].to_numpy(dtype=float)
    flags = np.asarray(annotations.negative_flags, dtype=bool)
    recoded = np.where(flags, LIKERT_MIN + LIKERT_MAX - items, items)
    scores = annotations.frame[keys].copy()
    scores['score'] = recoded.mean(axis=1)
    return scores


def normalize_annotator(scores: pd.DataFrame, column: str = 'score') -> pd.DataFrame:
    """Subtract each rater's mean score from that rater's scores.

    Adds a ``normalized`` column; raters with a single rating are shifted to 0
    and reported.
    """
    counts = scores.groupby('rater_id')[column].transform('size')
    single = sorted(scores.loc[counts < 2, 'rater_id'].unique())
    if single:
        logger.warning("raters with a single rating: %s", single)
    out = scores.copy()
    out['normalized'] = out[column] - out.groupby('rater_id')[column].transform('mean')
    return out


def binarize(score: float, threshold: float = 3.0) -> str:
    """'high' when the score is strictly above the threshold, else 'low'."""
    return HIGH if score > threshold else LOW


def binarize_series(scores: pd.Series, threshold: float = 3.0) -> pd.Series:
    """Vectorized ``binarize`` returning 1 for high and 0 for low."""
    return (scores > threshold).astype(int)
