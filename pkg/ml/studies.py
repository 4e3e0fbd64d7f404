"""Data-driven studies: window sizes, feature-set fusion and aggregators."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import pandas as pd

from analysis.aggregate import AGGREGATORS, select_columns
from config import get_settings
from errors import ConvQError, ValidationError
from .training import ExperimentResult, ModelTrainer

logger = logging.getLogger(__name__)

WINDOW_STUDY = 'window'
FUSION_STUDY = 'fusion'
AGGREGATOR_STUDY = 'aggregator'

FUSION_CONDITIONS: Dict[str, Sequence[str]] = {
    'tt': ('tt',),
    'sync': ('sync',),
    'caus': ('caus',),
    'conv': ('conv',),
    'coord': ('sync', 'caus', 'conv'),
    'tt+sync': ('tt', 'sync'),
    'tt+conv': ('tt', 'conv'),
    'tt+sync+conv': ('tt', 'sync', 'conv'),
    'all': ('tt', 'sync', 'caus', 'conv'),
}


def window_label(size_s: Optional[float]) -> str:
    return 'none' if size_s is None else f"{size_s:g}s"


@dataclass
class Experiment:
    """Results of one study for one dependent variable."""

    name: str
    dependent: str
    results: List[ExperimentResult] = field(default_factory=list)
    failed: Dict[str, str] = field(default_factory=dict)

    def ranking(self) -> pd.DataFrame:
        """Conditions ranked by mean AUC (ties keep condition order)."""
        if not self.results:
            return pd.DataFrame(columns=['rank', 'condition', 'auc_mean', 'auc_std'])
        table = pd.DataFrame([r.summary() for r in self.results])
        table = table.sort_values('auc_mean', ascending=False, kind='mergesort').reset_index(drop=True)
        table.insert(0, 'rank', range(1, len(table) + 1))
        return table

    def roc_table(self) -> pd.DataFrame:
        """Mean ROC of every condition in long format."""
        frames = []
        for result in self.results:
            roc = result.mean_roc()
            roc.insert(0, 'condition', result.condition)
            frames.append(roc)
        if not frames:
            return pd.DataFrame(columns=['condition', 'threshold', 'fpr', 'tpr'])
        return pd.concat(frames, ignore_index=True)

    def to_dict(self) -> Dict[str, object]:
        return {
            'study': self.name,
            'dependent': self.dependent,
            'conditions': [r.summary() for r in self.results],
            'fold_auc': {r.condition: r.fold_auc for r in self.results},
            'failed': dict(self.failed),
        }


def study_conditions(
    study: str,
    tables: Mapping[Optional[float], pd.DataFrame],
    settings=None,
) -> Dict[str, pd.DataFrame]:
    """Feature matrix per condition of a study.

    Args:
        study: 'window', 'fusion' or 'aggregator'
        tables: Feature matrix per window size (None = no window); fusion and
            aggregator studies use the no-window matrix, or the first one
        settings: Settings instance

    Returns:
        Mapping of condition name to feature matrix
    """
    settings = settings or get_settings()
    if not tables:
        raise ValidationError('no feature matrices available')
    base = tables[None] if None in tables else next(iter(tables.values()))
    sets = list(settings.FEATURE_SETS)

    if study == WINDOW_STUDY:
        conditions = {}
        for size in settings.STUDY_WINDOW_SIZES_S:
            if size not in tables:
                raise ValidationError(f"missing features for window {window_label(size)}", [window_label(size)])
            frame = tables[size]
            conditions[window_label(size)] = frame[select_columns(frame, sets)]
        return conditions
    if study == FUSION_STUDY:
        return {name: base[select_columns(base, members)] for name, members in FUSION_CONDITIONS.items()}
    if study == AGGREGATOR_STUDY:
        return {agg: base[select_columns(base, sets, [agg])] for agg in AGGREGATORS}
    raise ValueError(f"unknown study '{study}'")


def run_study(
    study: str,
    conditions: Mapping[str, pd.DataFrame],
    labels: pd.Series,
    dependent: str = 'GroupPCQ',
    settings=None,
) -> Experiment:
    """Evaluate every condition on identical folds.

    Rows are aligned to the samples present in every condition and labelled,
    so the fold split is shared. A condition without usable features is
    reported as failed.
    """
    settings = settings or get_settings()
    if not conditions:
        raise ValidationError(f"study '{study}' has no conditions")
    index = labels.dropna().index
    for frame in conditions.values():
        index = index.intersection(frame.index)
    index = index.sort_values()
    y = labels.loc[index].astype(int).to_numpy()

    trainer = ModelTrainer(settings)
    folds = trainer.folds(y)
    experiment = Experiment(study, dependent)
    logger.info("Running %s study on %s: %d conditions, %d samples", study, dependent, len(conditions), len(index))
    for name, frame in conditions.items():
        X = frame.loc[index]
        if X.shape[1] == 0 or X.isna().all().all():
            experiment.failed[name] = 'no features'
            logger.warning("%s study: condition %s has no features", study, name)
            continue
        try:
            experiment.results.append(trainer.train_eval(X, y, name, folds))
        except ConvQError as e:
            experiment.failed[name] = str(e)
            logger.warning("%s study: condition %s failed: %s", study, name, e)
    return experiment
