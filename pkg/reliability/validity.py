"""Construct validity of the questionnaire by principal component analysis."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.decomposition import PCA
from sklearn.preprocessing import StandardScaler

from errors import DegenerateSignalError, InsufficientDataError
from ingest.models import AnnotationSet

logger = logging.getLogger(__name__)


@dataclass
class ValidityReport:
    """Eigen-structure of the item correlation matrix."""

    items: List[str]
    eigenvalues: np.ndarray
    explained_ratio: np.ndarray
    loadings: pd.DataFrame
    scores: pd.DataFrame

    @property
    def cumulative_ratio(self) -> np.ndarray:
        return np.cumsum(self.explained_ratio)

    @property
    def rank(self) -> int:
        return int(self.eigenvalues.size)

    def eigen_table(self) -> pd.DataFrame:
        """Eigenvalue and cumulative explained variance per component."""
        return pd.DataFrame({
            'component': np.arange(1, self.rank + 1),
            'eigenvalue': self.eigenvalues,
            'explained_ratio': self.explained_ratio,
            'cumulative_ratio': self.cumulative_ratio,
        })


def construct_validity_pca(
    items: np.ndarray,
    item_names: Optional[Sequence[str]] = None,
    negative: Optional[Sequence[bool]] = None,
    tol: float = 1e-10,
) -> ValidityReport:
    """PCA of standardized item ratings.

    Components beyond the rank of the correlation matrix are omitted with a
    warning. PC1 is oriented so that most positively oriented items load
    positively; PC2 so that its loadings sum to a non-negative value.

    Args:
        items: Samples x items rating matrix
        item_names: Item ids (default: item_1..item_K)
        negative: Orientation flag per item (default: all positive)
        tol: Relative eigenvalue tolerance for the rank

    Returns:
        ValidityReport with loadings and sample scores on PC1/PC2
    """
    X = np.asarray(items, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 2:
        raise InsufficientDataError(f"need at least 2 samples and 2 items, got shape {X.shape}")
    names = list(item_names) if item_names is not None else [f"item_{k + 1}" for k in range(X.shape[1])]
    flags = np.asarray(negative if negative is not None else [False] * X.shape[1], dtype=bool)

    constant = [names[k] for k in np.flatnonzero(X.std(axis=0) == 0)]
    if constant:
        raise DegenerateSignalError(','.join(constant), 'item has zero variance')

    Z = StandardScaler().fit_transform(X)
    pca = PCA(svd_solver='full').fit(Z)
    # Rescale covariance eigenvalues (ddof=1) to correlation-matrix eigenvalues (ddof=0).
    eigenvalues = pca.explained_variance_ * (X.shape[0] - 1) / X.shape[0]
    rank = int((eigenvalues > tol * eigenvalues.max()).sum())
    if rank < eigenvalues.size:
        logger.warning("item correlation matrix has rank %d < %d; dropping null components", rank, eigenvalues.size)
    eigenvalues = eigenvalues[:rank]
    components = pca.components_[:rank].copy()

    positive = ~flags
    if positive.any() and (components[0, positive] > 0).sum() < (components[0, positive] < 0).sum():
        components[0] *= -1
    if rank > 1 and components[1].sum() < 0:
        components[1] *= -1

    n_show = min(2, rank)
    pcs = [f"PC{k + 1}" for k in range(n_show)]
    loadings = pd.DataFrame(
        (components[:n_show] * np.sqrt(eigenvalues[:n_show, None])).T, index=names, columns=pcs,
    )
    scores = pd.DataFrame(Z @ components[:n_show].T, columns=pcs)
    ratio = eigenvalues / eigenvalues.sum()
    return ValidityReport(names, eigenvalues, ratio, loadings, scores)


def annotation_validity(annotations: AnnotationSet) -> ValidityReport:
    """Construct validity over every rating row of an annotation set."""
    frame = annotations.frame
    report = construct_validity_pca(
        frame[annotations.item_ids].to_numpy(dtype=float),
        annotations.item_ids,
        annotations.negative_flags,
    )
    keys = frame[['rater_id'] + annotations.key_columns].reset_index(drop=True)
    report.scores = pd.concat([keys, report.scores], axis=1)
    logger.info(
        "%s level: PC1 explains %.1f%% of item variance",
        annotations.level, 100.0 * report.explained_ratio[0],
    )
    return report
