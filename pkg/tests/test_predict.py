"""Test oversampling, cross-validated classification and studies."""

import numpy as np
import pandas as pd
import pytest

from config.settings import Settings
from errors import InsufficientDataError, StratificationError, ValidationError
from ml.models import ElasticLogisticModel, build_pipeline, smote
from ml.studies import (
    AGGREGATOR_STUDY,
    FUSION_CONDITIONS,
    FUSION_STUDY,
    WINDOW_STUDY,
    run_study,
    study_conditions,
    window_label,
)
from ml.training import ExperimentResult, ModelTrainer, check_stratification, threshold_roc


def on_segment(point, a, b, tol=1e-9):
    direction = b - a
    length = direction @ direction
    if length == 0:
        return np.allclose(point, a, atol=tol)
    u = (point - a) @ direction / length
    return -tol <= u <= 1 + tol and np.allclose(a + u * direction, point, atol=1e-7)


@pytest.fixture
def separable():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(-3.0, 0.5, size=(50, 2)), rng.normal(3.0, 0.5, size=(50, 2))])
    y = np.array([0] * 50 + [1] * 50)
    return X, y


def test_smote_balanced_identity():
    """Test balanced data is returned unchanged."""
    X = np.arange(8.0).reshape(4, 2)
    y = np.array([0, 1, 0, 1])
    X2, y2 = smote(X, y)
    np.testing.assert_array_equal(X2, X)
    np.testing.assert_array_equal(y2, y)


def test_smote_two_point_minority_on_segment():
    """Test synthetic points lie between the two minority samples."""
    X = np.vstack([[[0.0, 0.0], [1.0, 1.0]], np.random.default_rng(1).normal(5.0, 1.0, size=(6, 2))])
    y = np.array([1, 1, 0, 0, 0, 0, 0, 0])
    X2, y2 = smote(X, y, k=1)
    synthetic = X2[len(X):]
    assert len(synthetic) == 4
    assert (y2[len(X):] == 1).all()
    for point in synthetic:
        assert on_segment(point, X[0], X[1])


def test_smote_counts_and_convexity():
    """Test a 20/80 split becomes 80/80 with convex combinations of minority points."""
    rng = np.random.default_rng(2)
    X = np.vstack([rng.normal(size=(20, 3)), rng.normal(2.0, 1.0, size=(80, 3))])
    y = np.array([1] * 20 + [0] * 80)
    X2, y2 = smote(X, y, k=5, seed=3)
    assert (y2 == 1).sum() == 80 and (y2 == 0).sum() == 80
    minority = X[:20]
    for point in X2[len(X):]:
        assert any(on_segment(point, minority[i], minority[j])
                   for i in range(20) for j in range(20) if i != j)


def test_smote_errors():
    """Test one-sample minority and single-class input."""
    with pytest.raises(InsufficientDataError):
        smote(np.zeros((5, 2)), np.array([1, 0, 0, 0, 0]))
    with pytest.raises(InsufficientDataError):
        smote(np.zeros((4, 2)), np.zeros(4))


def test_elastic_logistic_model(separable):
    """Test penalized and unpenalized fits separate clean classes."""
    X, y = separable
    for lam in (0.0, 0.01):
        model = ElasticLogisticModel(lam=lam, random_state=0).fit(X, y)
        assert list(model.classes_) == [0, 1]
        assert (model.predict(X) == y).all()
        assert model.predict_proba(X).shape == (100, 2)


def test_pipeline_steps():
    """Test the preprocessing order of the classifier pipeline."""
    pipeline = build_pipeline()
    assert [name for name, _ in pipeline.steps] == ['impute', 'scale', 'pca', 'smote', 'clf']


def test_check_stratification():
    """Test too few minority samples for the fold count."""
    check_stratification(np.array([0] * 5 + [1] * 5), 5)
    with pytest.raises(StratificationError):
        check_stratification(np.array([0] * 10 + [1] * 3), 5)
    with pytest.raises(StratificationError):
        check_stratification(np.ones(10, dtype=int), 5)


def test_train_eval_separable(separable):
    """Test linearly separable data scores AUC 1 in every fold."""
    X, y = separable
    trainer = ModelTrainer(Settings({'ELASTIC_LAMBDAS': '0.01'}))
    result = trainer.train_eval(X, y, 'separable')
    assert len(result.fold_auc) == 5
    assert all(a == pytest.approx(1.0) for a in result.fold_auc)
    assert result.confusion.sum() == 100
    assert result.summary()['tp'] + result.summary()['fn'] == 50


def test_train_eval_shuffled_labels():
    """Test random labels stay near chance."""
    rng = np.random.default_rng(4)
    X = rng.normal(size=(100, 5))
    y = rng.permutation([0] * 50 + [1] * 50)
    result = ModelTrainer(Settings()).train_eval(X, y, 'shuffled')
    assert 0.35 <= result.auc_mean <= 0.65
    for auc in result.fold_auc:
        assert 0.0 <= auc <= 1.0


def test_train_eval_imbalanced_with_nan(separable):
    """Test oversampling and imputation inside training folds."""
    X, y = separable
    keep = np.r_[0:50, 50:70]
    X = X[keep].copy()
    X[3, 0] = np.nan
    result = ModelTrainer(Settings({'ELASTIC_LAMBDAS': '0.01'})).train_eval(X, y[keep])
    assert result.auc_mean > 0.95
    assert result.n_samples == 70


def test_train_eval_stratification_error():
    """Test a class too small for five folds is rejected."""
    X = np.random.default_rng(5).normal(size=(20, 2))
    y = np.array([0] * 17 + [1] * 3)
    with pytest.raises(StratificationError):
        ModelTrainer(Settings()).train_eval(X, y)


def test_folds_deterministic():
    """Test identical labels give identical folds."""
    y = np.array([0, 1] * 20)
    trainer = ModelTrainer(Settings())
    first, second = trainer.folds(y), trainer.folds(y)
    for (a_train, a_test), (b_train, b_test) in zip(first, second):
        np.testing.assert_array_equal(a_test, b_test)
        np.testing.assert_array_equal(a_train, b_train)


def test_threshold_roc():
    """Test rates at evenly spaced score thresholds."""
    y = np.array([0, 0, 1, 1])
    roc = threshold_roc(y, np.array([0.12, 0.43, 0.37, 0.81]))
    assert len(roc['threshold']) == 101
    at = {t: k for k, t in enumerate(np.round(roc['threshold'], 2))}
    assert (roc['fpr'][at[0.0]], roc['tpr'][at[0.0]]) == (1.0, 1.0)
    assert (roc['fpr'][at[0.3]], roc['tpr'][at[0.3]]) == (0.5, 1.0)
    assert (roc['fpr'][at[0.4]], roc['tpr'][at[0.4]]) == (0.5, 0.5)
    assert (roc['fpr'][at[0.9]], roc['tpr'][at[0.9]]) == (0.0, 0.0)
    assert (np.diff(roc['fpr']) <= 0).all() and (np.diff(roc['tpr']) <= 0).all()


def test_mean_roc_averages_folds():
    """Test the averaged ROC is the pointwise fold mean at each threshold."""
    y = np.array([0, 0, 1, 1])
    first = threshold_roc(y, np.array([0.12, 0.43, 0.37, 0.81]))
    second = threshold_roc(y, np.array([0.05, 0.2, 0.6, 0.9]))
    roc = ExperimentResult('c', [0.75, 1.0], [first, second]).mean_roc()
    assert list(roc.columns) == ['threshold', 'fpr', 'tpr']
    np.testing.assert_allclose(roc['threshold'], np.linspace(0.0, 1.0, 101))
    np.testing.assert_allclose(roc['tpr'], (first['tpr'] + second['tpr']) / 2)
    np.testing.assert_allclose(roc['fpr'], (first['fpr'] + second['fpr']) / 2)
    assert ExperimentResult('c', []).mean_roc()['tpr'].isna().all()


@pytest.fixture
def feature_frame():
    rng = np.random.default_rng(6)
    n = 60
    labels = pd.Series([0, 1] * (n // 2), index=[f"S{k:02d}" for k in range(n)])
    signal = labels.to_numpy() * 2.0
    frame = pd.DataFrame({
        'group_id': 'G',
        'cardinality': 3,
        'eq__speech__mean': rng.normal(size=n),
        'corr__raw_x__mean': signal + rng.normal(size=n),
        'corr__raw_x__max': rng.normal(size=n),
        'granger_f_out__raw_x__mean': rng.normal(size=n),
        'symconv_rho__raw_x__median': rng.normal(size=n),
    }, index=labels.index)
    return frame, labels


def test_study_conditions(feature_frame):
    """Test fusion, aggregator and window conditions."""
    frame, _ = feature_frame
    fusion = study_conditions(FUSION_STUDY, {None: frame}, Settings())
    assert list(fusion) == list(FUSION_CONDITIONS)
    assert list(fusion['sync'].columns) == ['corr__raw_x__mean', 'corr__raw_x__max']
    assert fusion['all'].shape[1] == 5

    aggregators = study_conditions(AGGREGATOR_STUDY, {None: frame}, Settings())
    assert len(aggregators) == 6
    assert list(aggregators['median'].columns) == ['symconv_rho__raw_x__median']

    settings = Settings({'STUDY_WINDOW_SIZES_S': 'none,1'})
    windows = study_conditions(WINDOW_STUDY, {None: frame, 1.0: frame}, settings)
    assert list(windows) == ['none', '1s']
    with pytest.raises(ValidationError):
        study_conditions(WINDOW_STUDY, {None: frame}, settings)
    with pytest.raises(ValueError):
        study_conditions('nope', {None: frame}, settings)
    assert window_label(None) == 'none' and window_label(2.5) == '2.5s'


def test_run_study_identical_conditions(feature_frame):
    """Test identical conditions get identical AUC and empty ones fail."""
    frame, labels = feature_frame
    settings = Settings({'ELASTIC_LAMBDAS': '0.1'})
    sync = frame[['corr__raw_x__mean', 'corr__raw_x__max']]
    experiment = run_study(FUSION_STUDY, {'a': sync, 'b': sync.copy(), 'empty': frame[[]]}, labels, settings=settings)
    a, b = experiment.results
    assert a.fold_auc == b.fold_auc
    assert experiment.failed == {'empty': 'no features'}

    ranking = experiment.ranking()
    assert list(ranking['rank']) == [1, 2]
    assert list(ranking['condition']) == ['a', 'b']
    assert ranking['auc_mean'].iloc[0] > 0.8
    assert set(experiment.roc_table()['condition']) == {'a', 'b'}
    assert experiment.to_dict()['failed'] == {'empty': 'no features'}


def test_run_study_aligns_rows(feature_frame):
    """Test rows missing from any condition are dropped before splitting."""
    frame, labels = feature_frame
    settings = Settings({'ELASTIC_LAMBDAS': '0.1'})
    partial = frame[['corr__raw_x__mean']].iloc[:50]
    experiment = run_study(FUSION_STUDY, {'full': frame[['corr__raw_x__mean']], 'partial': partial}, labels,
                           settings=settings)
    assert all(r.n_samples == 50 for r in experiment.results)
    with pytest.raises(ValidationError):
        run_study(FUSION_STUDY, {}, labels, settings=settings)
