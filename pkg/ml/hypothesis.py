"""Hypothesis grid: cardinality, turn-taking and coordination effects on PCQ."""

import logging
from typing import Dict, List, Mapping, Optional

import numpy as np
import pandas as pd

from analysis.aggregate import feature_set_of
from config import get_settings
from errors import ConvQError
from .regression import LASSO, QLS, SPEARMAN, RegressionResult, lasso, quantile_regression, spearman_table

logger = logging.getLogger(__name__)

INDIV_PCQ = 'IndivPCQ'
GROUP_PCQ = 'GroupPCQ'
PREDICTOR_SETS = ('cardinality', 'turn_taking', 'coordination')

TT_PREDICTORS = ('eq', 'd_silence', 'n_backchannels', 'd_overlap', 'n_success_intr', 'n_unsuccess_intr')
QLS_COORDINATION_CHANNEL = 'euclid_norm'
QLS_COORDINATION_AGGREGATOR = 'mean'

# Directions reported for the licensed recordings.
REFERENCE_SIGNS = {
    'cardinality': -1,
    'eq': 1,
    'd_silence': -1,
    'n_success_intr': -1,
    'n_unsuccess_intr': 1,
}


def predictor_columns(frame: pd.DataFrame, predictor_set: str, for_qls: bool = False) -> List[str]:
    """Columns of ``frame`` forming a predictor set.

    Turn-taking uses own values where present (individual level) and mean
    aggregates otherwise. QLS on coordination is restricted to mean
    aggregates of the Euclidean-norm channel to keep the design well posed.
    """
    if predictor_set == 'cardinality':
        return ['cardinality'] if 'cardinality' in frame else []

    columns = []
    if predictor_set == 'turn_taking':
        for feature in TT_PREDICTORS:
            own = f"{feature}__speech"
            mean = f"{feature}__speech__mean"
            if own in frame:
                columns.append(own)
            elif mean in frame:
                columns.append(mean)
        return columns

    for col in frame.columns:
        parts = col.split('__')
        if len(parts) != 3 or feature_set_of(parts[0]) not in ('sync', 'caus', 'conv'):
            continue
        if for_qls and (parts[1] != QLS_COORDINATION_CHANNEL or parts[2] != QLS_COORDINATION_AGGREGATOR):
            continue
        columns.append(col)
    return columns


def _clean(frame: pd.DataFrame, columns: List[str], target: pd.Series):
    data = frame[columns].join(target.rename('__y__'), how='inner')
    data = data.dropna(axis=1, how='all').dropna()
    predictors = [c for c in data.columns if c != '__y__' and data[c].nunique() > 1]
    return data[predictors], data['__y__']


def hypothesis_tests(
    features: pd.DataFrame,
    target: pd.Series,
    dependent: str,
    settings=None,
) -> List[RegressionResult]:
    """Nine tests of one dependent variable.

    Every p-value is Bonferroni-adjusted by ``BONFERRONI_TESTS`` (default 18:
    2 dependents x 3 predictor sets x 3 models).

    QLS is fitted per predictor set; LASSO jointly over all sets, then
    Spearman on the LASSO-kept predictors. Each result records its
    predictor set and dependent variable in ``extra``.
    """
    settings = settings or get_settings()
    results: List[RegressionResult] = []

    def tag(result: RegressionResult, predictor_set: str) -> RegressionResult:
        result.significance = settings.SIGNIFICANCE
        result.extra.update(dependent=dependent, predictor_set=predictor_set)
        return result

    for predictor_set in PREDICTOR_SETS:
        try:
            X, y = _clean(features, predictor_columns(features, predictor_set, for_qls=True), target)
            result = quantile_regression(
                X, y, settings.QUANTILE, n_boot=settings.BOOTSTRAP_RESAMPLES,
                seed=settings.SEED, workers=settings.WORKERS,
            )
            results.append(tag(result, predictor_set))
        except ConvQError as e:
            logger.warning("%s QLS on %s skipped: %s", dependent, predictor_set, e)

    all_columns = [c for s in PREDICTOR_SETS for c in predictor_columns(features, s)]
    try:
        X, y = _clean(features, all_columns, target)
        joint = lasso(X, y, settings.LASSO_ALPHAS, cv=settings.CV_FOLDS, seed=settings.SEED)
    except (ConvQError, ValueError) as e:
        logger.warning("%s joint LASSO skipped: %s", dependent, e)
        joint = None

    if joint is not None:
        set_of = {c: s for s in PREDICTOR_SETS for c in predictor_columns(features, s)}
        for predictor_set in PREDICTOR_SETS:
            idx = [k for k, name in enumerate(joint.predictors) if set_of.get(name) == predictor_set]
            if not idx:
                continue
            names = [joint.predictors[k] for k in idx]
            results.append(tag(RegressionResult(
                LASSO, names, joint.coefficients[idx], joint.p_values[idx], alpha=joint.alpha,
                n_samples=joint.n_samples,
            ), predictor_set))
            kept = [n for n in names if n in joint.kept]
            if kept:
                results.append(tag(spearman_table(X[kept], y.to_numpy()), predictor_set))

    m = settings.BONFERRONI_TESTS
    for result in results:
        result.adjust(m)
    n_p = int(sum(np.isfinite(r.p_values).sum() for r in results))
    logger.info("%s: %d tests, %d p-values, Bonferroni m=%d", dependent, len(results), n_p, m)
    return results


def hypothesis_grid(
    features: Mapping[str, pd.DataFrame],
    targets: Mapping[str, pd.Series],
    settings=None,
) -> pd.DataFrame:
    """Results table over both dependent variables.

    Args:
        features: Feature matrix per dependent variable (IndivPCQ, GroupPCQ)
        targets: Continuous PCQ per dependent variable, indexed like features

    Returns:
        DataFrame with dependent, predictor_set, model, predictor, beta, p,
        adjusted_p, significant
    """
    frames = []
    for dependent in (INDIV_PCQ, GROUP_PCQ):
        if dependent not in features or dependent not in targets:
            continue
        for result in hypothesis_tests(features[dependent], targets[dependent], dependent, settings):
            frame = result.to_frame()
            frame.insert(0, 'predictor_set', result.extra['predictor_set'])
            frame.insert(0, 'dependent', dependent)
            frames.append(frame)
    if not frames:
        return pd.DataFrame(columns=['dependent', 'predictor_set', 'model', 'predictor', 'beta', 'p',
                                     'adjusted_p', 'significant'])
    return pd.concat(frames, ignore_index=True)


def sign_agreement(grid: pd.DataFrame) -> pd.DataFrame:
    """Compare coefficient signs with the reference directions."""
    rows = []
    for _, row in grid.iterrows():
        base = row['predictor'].split('__')[0]
        if base not in REFERENCE_SIGNS or not np.isfinite(row['beta']) or row['beta'] == 0:
            continue
        sign = int(np.sign(row['beta']))
        rows.append({
            'dependent': row['dependent'],
            'model': row['model'],
            'predictor': row['predictor'],
            'expected_sign': REFERENCE_SIGNS[base],
            'observed_sign': sign,
            'agrees': sign == REFERENCE_SIGNS[base],
            'significant': bool(row['significant']),
        })
    return pd.DataFrame(rows, columns=['dependent', 'model', 'predictor', 'expected_sign',
                                       'observed_sign', 'agrees', 'significant'])
