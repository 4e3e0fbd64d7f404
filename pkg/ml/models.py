"""Classifier definitions for binary PCQ prediction."""

import logging
from typing import Optional, Tuple

import numpy as np
from imblearn.over_sampling import SMOTE
from imblearn.pipeline import Pipeline
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.decomposition import PCA
from sklearn.impute import SimpleImputer
from sklearn.linear_model import LogisticRegression
from sklearn.preprocessing import StandardScaler
from sklearn.utils.multiclass import unique_labels

from errors import InsufficientDataError

logger = logging.getLogger(__name__)


class ElasticLogisticModel(ClassifierMixin, BaseEstimator):
    """Logistic regression with the elastic loss.

    Minimizes mean logistic loss + lam * (l1_ratio * |b|_1 + (1 - l1_ratio) / 2 * |b|_2^2)
    with the proximal SAGA solver. ``lam = 0`` fits the unpenalized model.
    """

    def __init__(self, lam: float = 0.1, l1_ratio: float = 0.5, tol: float = 1e-8,
                 max_iter: int = 20000, random_state: Optional[int] = None):
        self.lam = lam
        self.l1_ratio = l1_ratio
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        self.classes_ = unique_labels(y)
        if self.lam > 0:
            # Scale the penalty so the loss is averaged over samples.
            C = 1.0 / (X.shape[0] * self.lam)
            self.model_ = LogisticRegression(
                penalty='elasticnet', solver='saga', l1_ratio=self.l1_ratio, C=C,
                tol=self.tol, max_iter=self.max_iter, random_state=self.random_state,
            )
        else:
            self.model_ = LogisticRegression(
                penalty=None, solver='lbfgs', tol=self.tol, max_iter=self.max_iter,
            )
        self.model_.fit(X, y)
        return self

    def predict_proba(self, X):
        return self.model_.predict_proba(np.asarray(X, dtype=float))

    def decision_function(self, X):
        return self.model_.decision_function(np.asarray(X, dtype=float))

    def predict(self, X):
        return self.model_.predict(np.asarray(X, dtype=float))

    @property
    def coef_(self):
        return self.model_.coef_


def smote(X, y, k: int = 5, seed: int = 42) -> Tuple[np.ndarray, np.ndarray]:
    """Balance classes by synthetic minority oversampling.

    ``k`` is reduced to the minority size - 1 when larger.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2:
        raise InsufficientDataError('SMOTE needs two classes')
    minority = int(counts.min())
    if minority < 2:
        raise InsufficientDataError(f"SMOTE needs at least 2 minority samples, got {minority}")
    if counts.min() == counts.max():
        return X.copy(), y.copy()
    k_eff = min(k, minority - 1)
    if k_eff < k:
        logger.debug("SMOTE: k reduced from %d to %d", k, k_eff)
    return SMOTE(k_neighbors=k_eff, random_state=seed).fit_resample(X, y)


def build_pipeline(
    lam: float = 0.1,
    l1_ratio: float = 0.5,
    pca_variance: float = 0.95,
    smote_k: int = 5,
    seed: int = 42,
) -> Pipeline:
    """Impute, standardize, reduce, oversample and classify.

    Oversampling runs only while fitting, so test data is never resampled.
    """
    return Pipeline([
        ('impute', SimpleImputer(strategy='median')),
        ('scale', StandardScaler()),
        ('pca', PCA(n_components=pca_variance if pca_variance < 1 else None, svd_solver='full', random_state=seed)),
        ('smote', SMOTE(k_neighbors=smote_k, random_state=seed)),
        ('clf', ElasticLogisticModel(lam=lam, l1_ratio=l1_ratio, random_state=seed)),
    ])
