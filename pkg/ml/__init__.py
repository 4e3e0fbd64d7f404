"""Statistical models and classifiers for conversation quality."""

from .regression import (
    QLS,
    LASSO,
    SPEARMAN,
    RegressionResult,
    quantile_regression,
    lasso,
    spearman,
    spearman_table,
    bonferroni,
    check_loss,
)
from .hypothesis import INDIV_PCQ, GROUP_PCQ, hypothesis_tests, hypothesis_grid, sign_agreement
from .models import ElasticLogisticModel, build_pipeline, smote
from .training import ExperimentResult, ModelTrainer, threshold_roc
from .studies import FUSION_CONDITIONS, Experiment, study_conditions, run_study, window_label

__all__ = [
    'QLS',
    'LASSO',
    'SPEARMAN',
    'RegressionResult',
    'quantile_regression',
    'lasso',
    'spearman',
    'spearman_table',
    'bonferroni',
    'check_loss',
    'INDIV_PCQ',
    'GROUP_PCQ',
    'hypothesis_tests',
    'hypothesis_grid',
    'sign_agreement',
    'ElasticLogisticModel',
    'build_pipeline',
    'smote',
    'ExperimentResult',
    'ModelTrainer',
    'threshold_roc',
    'FUSION_CONDITIONS',
    'Experiment',
    'study_conditions',
    'run_study',
    'window_label',
]
