"""Hypothesis-driven regression models: median regression, LASSO and rank correlation."""

import logging
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import stats
from sklearn.linear_model import Lasso, LassoCV, LinearRegression
from sklearn.model_selection import KFold
from sklearn.preprocessing import StandardScaler
from statsmodels.regression.quantile_regression import QuantReg
from statsmodels.tools.sm_exceptions import ConvergenceWarning, IterationLimitWarning
from statsmodels.tools.tools import add_constant

from errors import (
    ConvergenceError,
    InsufficientDataError,
    RankDeficiencyError,
    UndefinedStatisticError,
)

logger = logging.getLogger(__name__)

QLS = 'QLS'
LASSO = 'LASSO'
SPEARMAN = 'Spearman'
MODELS = (QLS, LASSO, SPEARMAN)

IRLS_MAX_ITER = 500
IRLS_TOL = 1e-8


@dataclass
class RegressionResult:
    """Coefficients and p-values of one model fit."""

    model: str
    predictors: List[str]
    coefficients: np.ndarray
    p_values: np.ndarray
    adjusted_p: Optional[np.ndarray] = None
    significance: float = 0.005
    alpha: Optional[float] = None
    n_samples: int = 0
    extra: dict = field(default_factory=dict)

    def adjust(self, m: int) -> 'RegressionResult':
        """Apply Bonferroni correction for ``m`` tests."""
        self.adjusted_p = bonferroni(self.p_values, m)
        return self

    @property
    def significant(self) -> np.ndarray:
        adjusted = self.adjusted_p if self.adjusted_p is not None else self.p_values
        return np.asarray(adjusted) < self.significance

    @property
    def kept(self) -> List[str]:
        """Predictors with a nonzero coefficient."""
        return [name for name, beta in zip(self.predictors, self.coefficients) if beta != 0]

    def to_frame(self) -> pd.DataFrame:
        adjusted = self.adjusted_p if self.adjusted_p is not None else np.full(len(self.predictors), np.nan)
        return pd.DataFrame({
            'model': self.model,
            'predictor': self.predictors,
            'beta': self.coefficients,
            'p': self.p_values,
            'adjusted_p': adjusted,
            'significant': self.significant,
        })


def _design(X, names: Optional[Sequence[str]]) -> Tuple[np.ndarray, List[str]]:
    if isinstance(X, pd.DataFrame):
        names = list(X.columns) if names is None else list(names)
        X = X.to_numpy(dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names = list(names) if names is not None else [f"x{k}" for k in range(X.shape[1])]
    return X, names


def check_loss(residuals: np.ndarray, q: float = 0.5) -> float:
    """Sum of the quantile check loss u * (q - 1{u < 0})."""
    u = np.asarray(residuals, dtype=float)
    return float(np.sum(u * (q - (u < 0))))


def _fit_quantile(y: np.ndarray, exog: np.ndarray, q: float) -> np.ndarray:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always')
        with np.errstate(all='ignore'):
            result = QuantReg(y, exog).fit(q=q, vcov='iid', max_iter=IRLS_MAX_ITER, p_tol=IRLS_TOL)
    for w in caught:
        if issubclass(w.category, IterationLimitWarning):
            raise ConvergenceError(
                f"IRLS did not converge in {IRLS_MAX_ITER} iterations", result.history['mse'],
            )
        if issubclass(w.category, ConvergenceWarning):
            logger.debug("IRLS: %s", w.message)
    return np.asarray(result.params, dtype=float)


def _bootstrap_fit(y, exog, q, seed, b) -> Optional[np.ndarray]:
    rng = np.random.default_rng([seed, b])
    rows = rng.integers(0, y.size, y.size)
    try:
        return _fit_quantile(y[rows], exog[rows], q)
    except (ConvergenceError, np.linalg.LinAlgError):
        return None


def quantile_regression(
    X,
    y,
    q: float = 0.5,
    names: Optional[Sequence[str]] = None,
    n_boot: int = 1000,
    seed: int = 42,
    workers: int = 1,
) -> RegressionResult:
    """Quantile least squares with paired-bootstrap p-values.

    Coefficients minimize the check loss by iteratively reweighted least
    squares. Each p-value is a two-sided normal test of beta against its
    bootstrap standard error; resample b uses seed (seed, b).

    Args:
        X: Predictor matrix (no intercept column)
        y: Dependent variable
        q: Quantile in (0, 1)
        names: Predictor names
        n_boot: Bootstrap resamples (0 skips inference)
        seed: Master seed
        workers: Parallel workers for the bootstrap

    Returns:
        RegressionResult with intercept in ``extra['intercept']``
    """
    X, names = _design(X, names)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    if n <= k + 1:
        raise InsufficientDataError(f"need more than {k + 1} rows for {k} predictors, got {n}")
    exog = add_constant(X, prepend=True, has_constant='add')
    if np.linalg.matrix_rank(exog) < exog.shape[1]:
        raise RankDeficiencyError('predictors are collinear or constant')

    params = _fit_quantile(y, exog, q)
    p_values = np.full(k, np.nan)
    se = np.full(k, np.nan)
    if n_boot > 0:
        draws = Parallel(n_jobs=workers)(
            delayed(_bootstrap_fit)(y, exog, q, seed, b) for b in range(n_boot)
        ) if workers > 1 else [_bootstrap_fit(y, exog, q, seed, b) for b in range(n_boot)]
        draws = np.array([d for d in draws if d is not None])
        failed = n_boot - len(draws)
        if failed:
            logger.warning("QLS bootstrap: %d of %d resamples did not converge", failed, n_boot)
        if len(draws) > 1:
            se = draws[:, 1:].std(axis=0, ddof=1)
            with np.errstate(divide='ignore', invalid='ignore'):
                z = params[1:] / se
            p_values = np.where(se > 0, 2.0 * stats.norm.sf(np.abs(z)), np.where(params[1:] == 0, 1.0, 0.0))
    return RegressionResult(
        QLS, names, params[1:], p_values, n_samples=n,
        extra={'intercept': float(params[0]), 'bootstrap_se': se, 'quantile': q},
    )


def lasso(
    X,
    y,
    alphas: Sequence[float],
    names: Optional[Sequence[str]] = None,
    cv: int = 5,
    seed: int = 42,
) -> RegressionResult:
    """LASSO on standardized predictors, penalty chosen by k-fold CV error.

    Coefficients are reported on the original predictor scale. A single
    penalty skips cross-validation; a zero penalty is ordinary least
    squares. LASSO gives no p-values (NaN).
    """
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ValueError('lasso penalty grid is empty')
    X, names = _design(X, names)
    y = np.asarray(y, dtype=float)
    scaler = StandardScaler().fit(X)
    scale = np.where(scaler.scale_ > 0, scaler.scale_, 1.0)
    Z = (X - scaler.mean_) / scale

    if len(alphas) == 1:
        alpha = alphas[0]
        model = LinearRegression() if alpha == 0 else Lasso(alpha=alpha, max_iter=100000, tol=1e-10)
        model.fit(Z, y)
    else:
        folds = KFold(n_splits=min(cv, len(y)), shuffle=True, random_state=seed)
        model = LassoCV(alphas=sorted(alphas, reverse=True), cv=folds, max_iter=100000).fit(Z, y)
        alpha = float(model.alpha_)

    coefficients = np.asarray(model.coef_, dtype=float) / scale
    filtered = [n for n, b in zip(names, coefficients) if b == 0]
    logger.debug("LASSO (alpha=%g) filtered %d of %d predictors", alpha, len(filtered), len(names))
    return RegressionResult(
        LASSO, names, coefficients, np.full(len(names), np.nan), alpha=alpha, n_samples=len(y),
        extra={'intercept': float(model.intercept_ - np.dot(coefficients, scaler.mean_)), 'filtered': filtered},
    )


def spearman(x, y) -> Tuple[float, float]:
    """Spearman rank correlation and its t-approximation p-value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 4:
        raise InsufficientDataError('spearman needs two vectors of equal length >= 4')
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedStatisticError('rank correlation undefined for a constant vector')
    result = stats.spearmanr(x, y)
    return float(result.statistic), float(result.pvalue)


def spearman_table(X, y, names: Optional[Sequence[str]] = None) -> RegressionResult:
    """Spearman correlation of every predictor with y; undefined ones are NaN."""
    X, names = _design(X, names)
    rho = np.full(len(names), np.nan)
    p = np.full(len(names), np.nan)
    for k, name in enumerate(names):
        try:
            rho[k], p[k] = spearman(X[:, k], y)
        except UndefinedStatisticError:
            logger.debug("spearman undefined for %s", name)
    return RegressionResult(SPEARMAN, names, rho, p, n_samples=len(y))


def bonferroni(p_values, m: int) -> np.ndarray:
    """Bonferroni-adjusted p-values min(1, m * p)."""
    if m < 1:
        raise ValueError('number of tests must be at least 1')
    return np.minimum(1.0, m * np.asarray(p_values, dtype=float))
