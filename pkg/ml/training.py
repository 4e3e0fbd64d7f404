"""Cross-validated training and evaluation of PCQ classifiers."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.metrics import auc, confusion_matrix, roc_curve
from sklearn.model_selection import GridSearchCV, StratifiedKFold

from config import get_settings
from errors import StratificationError
from .models import build_pipeline

logger = logging.getLogger(__name__)

ROC_THRESHOLDS = np.linspace(0.0, 1.0, 101)


@dataclass
class ExperimentResult:
    """Cross-validated performance of one condition."""

    condition: str
    fold_auc: List[float]
    fold_roc: List[Dict[str, np.ndarray]] = field(default_factory=list)
    confusion: np.ndarray = field(default_factory=lambda: np.zeros((2, 2), dtype=int))
    chosen_lambda: List[float] = field(default_factory=list)
    n_samples: int = 0
    n_features: int = 0

    @property
    def auc_mean(self) -> float:
        return float(np.mean(self.fold_auc))

    @property
    def auc_std(self) -> float:
        return float(np.std(self.fold_auc))

    def mean_roc(self) -> pd.DataFrame:
        """Fold-averaged ROC at the shared score thresholds."""
        if not self.fold_roc:
            return pd.DataFrame({'threshold': ROC_THRESHOLDS, 'fpr': np.nan, 'tpr': np.nan})
        return pd.DataFrame({
            'threshold': self.fold_roc[0]['threshold'],
            'fpr': np.mean([roc['fpr'] for roc in self.fold_roc], axis=0),
            'tpr': np.mean([roc['tpr'] for roc in self.fold_roc], axis=0),
        })

    def summary(self) -> Dict[str, object]:
        tn, fp, fn, tp = self.confusion.ravel()
        return {
            'condition': self.condition,
            'auc_mean': self.auc_mean,
            'auc_std': self.auc_std,
            'n_samples': self.n_samples,
            'n_features': self.n_features,
            'tn': int(tn), 'fp': int(fp), 'fn': int(fn), 'tp': int(tp),
        }


def threshold_roc(
    y: np.ndarray,
    scores: np.ndarray,
    thresholds: np.ndarray = ROC_THRESHOLDS,
) -> Dict[str, np.ndarray]:
    """False- and true-positive rates of ``scores >= t`` for every threshold t."""
    y = np.asarray(y).astype(bool)
    predicted = np.asarray(scores)[None, :] >= np.asarray(thresholds)[:, None]
    return {
        'threshold': np.asarray(thresholds, dtype=float),
        'fpr': predicted[:, ~y].mean(axis=1),
        'tpr': predicted[:, y].mean(axis=1),
    }


def check_stratification(y: np.ndarray, folds: int) -> None:
    """Every class must appear in every test fold and twice in every training fold."""
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2:
        raise StratificationError(f"labels contain a single class {classes.tolist()}")
    if counts.min() < max(folds, 2):
        raise StratificationError(
            f"minority class has {int(counts.min())} samples, need at least {max(folds, 2)} for {folds} folds"
        )


class ModelTrainer:
    """Trains elastic-loss classifiers with stratified cross-validation."""

    def __init__(self, settings=None):
        """Initialize model trainer."""
        self.settings = settings or get_settings()

    def folds(self, y: np.ndarray) -> List[tuple]:
        """Stratified fold indices, identical for every condition with the same labels."""
        splitter = StratifiedKFold(n_splits=self.settings.CV_FOLDS, shuffle=True, random_state=self.settings.SEED)
        return list(splitter.split(np.zeros(len(y)), y))

    def _fit_fold(self, X_train: np.ndarray, y_train: np.ndarray):
        s = self.settings
        minority = int(np.bincount(y_train).min())
        lambdas = list(s.ELASTIC_LAMBDAS)
        pipeline = build_pipeline(lambdas[0], s.ELASTIC_L1_RATIO, s.PCA_VARIANCE, s.SMOTE_K, s.SEED)
        inner = min(s.CV_FOLDS, minority)
        if len(lambdas) == 1 or inner < 2:
            pipeline.set_params(smote__k_neighbors=max(min(s.SMOTE_K, minority - 1), 1))
            return pipeline.fit(X_train, y_train), lambdas[0]

        inner_minority = minority - int(np.ceil(minority / inner))
        pipeline.set_params(smote__k_neighbors=max(min(s.SMOTE_K, inner_minority - 1), 1))
        search = GridSearchCV(
            pipeline, {'clf__lam': lambdas}, scoring='roc_auc',
            cv=StratifiedKFold(n_splits=inner, shuffle=True, random_state=s.SEED),
        )
        search.fit(X_train, y_train)
        lam = float(search.best_params_['clf__lam'])
        pipeline.set_params(clf__lam=lam, smote__k_neighbors=max(min(s.SMOTE_K, minority - 1), 1))
        return pipeline.fit(X_train, y_train), lam

    def train_eval(
        self,
        X,
        y,
        condition: str = 'all',
        folds: Optional[Sequence[tuple]] = None,
    ) -> ExperimentResult:
        """Cross-validated AUC, ROC and confusion matrix of one feature matrix.

        Args:
            X: Feature matrix (NaN allowed; imputed inside training folds)
            y: Binary labels (1 = high PCQ)
            condition: Name of the evaluated condition
            folds: Precomputed (train, test) index pairs

        Returns:
            ExperimentResult with per-fold AUC and ROC
        """
        X = X.to_numpy(dtype=float) if isinstance(X, pd.DataFrame) else np.asarray(X, dtype=float)
        y = np.asarray(y).astype(int)
        check_stratification(y, self.settings.CV_FOLDS)
        X = X[:, ~np.all(np.isnan(X), axis=0)]
        folds = list(folds) if folds is not None else self.folds(y)

        result = ExperimentResult(condition, [], n_samples=len(y), n_features=X.shape[1])
        for k, (train, test) in enumerate(folds):
            if np.unique(y[test]).size < 2 or np.bincount(y[train], minlength=2).min() < 2:
                raise StratificationError(f"fold {k} of '{condition}' lacks a class")
            model, lam = self._fit_fold(X[train], y[train])
            scores = model.predict_proba(X[test])[:, 1]
            fpr, tpr, _ = roc_curve(y[test], scores)
            result.fold_auc.append(float(auc(fpr, tpr)))
            result.fold_roc.append(threshold_roc(y[test], scores))
            result.confusion += confusion_matrix(y[test], (scores >= 0.5).astype(int), labels=[0, 1])
            result.chosen_lambda.append(lam)

        logger.info("%s: AUC %.3f +/- %.3f over %d folds", condition, result.auc_mean, result.auc_std, len(folds))
        return result
