"""Test median regression, LASSO, rank correlation and the hypothesis grid."""

import numpy as np
import pandas as pd
import pytest
from scipy import stats as sps

from config.settings import Settings
from errors import InsufficientDataError, RankDeficiencyError, UndefinedStatisticError
from ml.hypothesis import (
    GROUP_PCQ,
    INDIV_PCQ,
    hypothesis_grid,
    hypothesis_tests,
    predictor_columns,
    sign_agreement,
)
from ml.regression import (
    LASSO,
    QLS,
    SPEARMAN,
    RegressionResult,
    bonferroni,
    check_loss,
    lasso,
    quantile_regression,
    spearman,
    spearman_table,
)


def test_check_loss():
    """Test the asymmetric check loss."""
    assert check_loss([1.0, -1.0], 0.5) == pytest.approx(1.0)
    assert check_loss([2.0], 0.9) == pytest.approx(1.8)
    assert check_loss([-2.0], 0.9) == pytest.approx(0.2)


def test_quantile_regression_exact_line():
    """Test y = 2x is recovered."""
    x = np.linspace(0.0, 10.0, 50)
    result = quantile_regression(x, 2.0 * x, n_boot=0)
    assert result.model == QLS
    assert result.coefficients[0] == pytest.approx(2.0, abs=1e-4)
    assert result.extra['intercept'] == pytest.approx(0.0, abs=1e-4)
    assert np.isnan(result.p_values).all()


def test_quantile_regression_robust_to_outliers():
    """Test the median slope ignores 10% large positive outliers."""
    rng = np.random.default_rng(0)
    x = np.linspace(0.0, 10.0, 200)
    y = 2.0 * x + 0.1 * rng.normal(size=200)
    outliers = rng.choice(200, size=20, replace=False)
    y[outliers] += 1000.0 * x[outliers] / 10.0 + 100.0
    result = quantile_regression(x, y, n_boot=0)
    assert abs(result.coefficients[0] - 2.0) < 0.1

    ols_slope = np.polyfit(x, y, 1)[0]
    assert abs(ols_slope - 2.0) > 1.0

    # The median fit should have no larger check loss than nearby slopes.
    loss = check_loss(y - result.extra['intercept'] - result.coefficients[0] * x)
    for slope in (1.9, 2.1):
        grid = [check_loss(y - b - slope * x) for b in np.linspace(-1, 1, 41)]
        assert loss <= min(grid) + 1e-6


def test_quantile_regression_bootstrap_deterministic():
    """Test seeded bootstrap p-values are reproducible and detect a real effect."""
    rng = np.random.default_rng(1)
    X = rng.normal(size=(80, 2))
    y = 1.5 * X[:, 0] + rng.normal(size=80)
    first = quantile_regression(X, y, names=['a', 'b'], n_boot=100, seed=7)
    second = quantile_regression(X, y, names=['a', 'b'], n_boot=100, seed=7)
    np.testing.assert_array_equal(first.p_values, second.p_values)
    assert first.p_values[0] < 0.005
    assert first.p_values[1] > 0.005
    assert first.predictors == ['a', 'b']


def test_quantile_regression_errors():
    """Test collinear and undersized designs."""
    x = np.arange(20.0)
    with pytest.raises(RankDeficiencyError):
        quantile_regression(np.column_stack([x, 2 * x]), x, n_boot=0)
    with pytest.raises(RankDeficiencyError):
        quantile_regression(np.column_stack([x, np.ones(20)]), x, n_boot=0)
    with pytest.raises(InsufficientDataError):
        quantile_regression(np.ones((3, 2)), np.ones(3), n_boot=0)


def test_lasso_total_shrinkage():
    """Test a huge penalty zeroes every coefficient."""
    rng = np.random.default_rng(2)
    X = rng.normal(size=(60, 3))
    result = lasso(X, X @ [1.0, -2.0, 0.5] + rng.normal(size=60), [1e6])
    assert result.model == LASSO
    assert (result.coefficients == 0).all()
    assert result.kept == []
    assert np.isnan(result.p_values).all()


def test_lasso_zero_penalty_is_ols():
    """Test a zero penalty gives the least-squares solution."""
    rng = np.random.default_rng(3)
    X = rng.normal(size=(50, 3))
    y = X @ [1.0, 2.0, -1.0] + 0.5 + 0.1 * rng.normal(size=50)
    result = lasso(X, y, [0.0])
    design = np.column_stack([np.ones(50), X])
    expected = np.linalg.lstsq(design, y, rcond=None)[0]
    np.testing.assert_allclose(result.coefficients, expected[1:], atol=1e-6)
    assert result.extra['intercept'] == pytest.approx(expected[0], abs=1e-6)


def test_lasso_duplicated_column():
    """Test only one copy of a duplicated predictor stays nonzero."""
    rng = np.random.default_rng(4)
    x = rng.normal(size=100)
    X = np.column_stack([x, x, rng.normal(size=100)])
    result = lasso(X, 3.0 * x + rng.normal(size=100), [0.1], names=['a', 'a_copy', 'b'])
    assert (result.coefficients[:2] != 0).sum() <= 1


def test_lasso_cross_validated_alpha():
    """Test CV picks a penalty from the grid and reports filtered predictors."""
    rng = np.random.default_rng(5)
    X = rng.normal(size=(100, 4))
    y = 2.0 * X[:, 0] + rng.normal(size=100)
    grid = [0.001, 0.01, 0.1, 1.0]
    result = lasso(X, y, grid, names=['a', 'b', 'c', 'd'], cv=5, seed=1)
    assert result.alpha in grid
    assert 'a' in result.kept
    assert set(result.extra['filtered']) | set(result.kept) == {'a', 'b', 'c', 'd'}
    with pytest.raises(ValueError):
        lasso(X, y, [])


def test_spearman_monotone():
    """Test monotone maps give perfect rank correlation."""
    x = np.linspace(-2.0, 2.0, 30)
    assert spearman(x, np.exp(x))[0] == pytest.approx(1.0)
    assert spearman(x, -x ** 3)[0] == pytest.approx(-1.0)


def test_spearman_ties_mid_ranks():
    """Test tied data against Pearson on explicitly assigned mid-ranks."""
    x = np.array([1, 2, 2, 3, 4, 4, 4, 5], dtype=float)
    y = np.array([2, 1, 3, 3, 5, 4, 6, 6], dtype=float)

    def mid_ranks(v):
        ranks = np.empty(len(v))
        for i, value in enumerate(v):
            below = sum(1 for w in v if w < value)
            equal = sum(1 for w in v if w == value)
            ranks[i] = below + (equal + 1) / 2.0
        return ranks

    expected = np.corrcoef(mid_ranks(x), mid_ranks(y))[0, 1]
    assert abs(spearman(x, y)[0] - expected) < 1e-12


def test_spearman_invariant_under_monotone_transform():
    """Test rank correlation ignores strictly monotone transforms."""
    rng = np.random.default_rng(6)
    x, y = rng.normal(size=40), rng.normal(size=40)
    assert spearman(np.exp(x), y ** 3)[0] == pytest.approx(spearman(x, y)[0])


def test_spearman_errors():
    """Test constant and short vectors."""
    with pytest.raises(UndefinedStatisticError):
        spearman(np.ones(5), np.arange(5.0))
    with pytest.raises(InsufficientDataError):
        spearman([1.0, 2.0, 3.0], [3.0, 2.0, 1.0])


def test_spearman_table_skips_constant():
    """Test undefined predictors become NaN."""
    x = np.arange(10.0)
    result = spearman_table(np.column_stack([x, np.ones(10)]), x, names=['x', 'c'])
    assert result.model == SPEARMAN
    assert result.coefficients[0] == pytest.approx(1.0)
    assert np.isnan(result.coefficients[1])


def test_bonferroni():
    """Test scaling, clamping and identity."""
    assert bonferroni([0.01], 18)[0] == pytest.approx(0.18)
    assert bonferroni([0.2], 18)[0] == 1.0
    np.testing.assert_array_equal(bonferroni([0.01, 0.5], 1), [0.01, 0.5])
    with pytest.raises(ValueError):
        bonferroni([0.1], 0)


def test_regression_result_significance():
    """Test significance follows adjusted p-values."""
    result = RegressionResult(QLS, ['a', 'b'], np.array([1.0, 0.0]), np.array([0.0001, 0.001]))
    result.adjust(10)
    assert list(result.significant) == [True, False]
    frame = result.to_frame()
    assert list(frame.columns) == ['model', 'predictor', 'beta', 'p', 'adjusted_p', 'significant']
    assert result.kept == ['a']


@pytest.fixture
def group_features():
    rng = np.random.default_rng(7)
    n = 120
    cardinality = rng.integers(3, 8, size=n).astype(float)
    frame = pd.DataFrame({
        'group_id': [f"G{k}" for k in range(n)],
        'cardinality': cardinality,
        'eq__speech__mean': rng.normal(size=n),
        'd_silence__speech__mean': rng.uniform(size=n),
        'n_backchannels__speech__mean': rng.poisson(3, size=n).astype(float),
        'corr__euclid_norm__mean': rng.normal(size=n),
        'corr__euclid_norm__max': rng.normal(size=n),
        'granger_f_out__raw_x__mean': rng.normal(size=n),
    }, index=pd.Index([f"G{k}_0" for k in range(n)], name='slice_id'))
    target = 5.0 - 0.4 * cardinality + 0.2 * rng.normal(size=n)
    return frame, pd.Series(target, index=frame.index)


def test_predictor_columns(group_features):
    """Test predictor sets and the QLS coordination restriction."""
    frame, _ = group_features
    assert predictor_columns(frame, 'cardinality') == ['cardinality']
    assert predictor_columns(frame, 'turn_taking') == [
        'eq__speech__mean', 'd_silence__speech__mean', 'n_backchannels__speech__mean',
    ]
    assert predictor_columns(frame, 'coordination', for_qls=True) == ['corr__euclid_norm__mean']
    assert len(predictor_columns(frame, 'coordination')) == 3

    individual = frame.assign(eq__speech=1.0)
    assert predictor_columns(individual, 'turn_taking')[0] == 'eq__speech'


def test_hypothesis_tests_detect_cardinality(group_features):
    """Test the cardinality effect is negative and significant."""
    frame, target = group_features
    settings = Settings({'BOOTSTRAP_RESAMPLES': '100'})
    results = hypothesis_tests(frame, target, GROUP_PCQ, settings)
    qls = [r for r in results if r.model == QLS and r.extra['predictor_set'] == 'cardinality']
    assert len(qls) == 1
    assert qls[0].coefficients[0] < 0
    assert qls[0].significant[0]
    assert all(r.extra['dependent'] == GROUP_PCQ for r in results)
    for result in results:
        finite = np.isfinite(result.p_values)
        np.testing.assert_allclose(result.adjusted_p[finite], np.minimum(1.0, 18 * result.p_values[finite]))


def test_hypothesis_grid_and_sign_agreement(group_features):
    """Test the grid layout and sign comparison."""
    frame, target = group_features
    settings = Settings({'BOOTSTRAP_RESAMPLES': '50'})
    grid = hypothesis_grid({GROUP_PCQ: frame}, {GROUP_PCQ: target}, settings)
    assert list(grid.columns[:2]) == ['dependent', 'predictor_set']
    assert set(grid['dependent']) == {GROUP_PCQ}
    assert {QLS, LASSO} <= set(grid['model'])

    signs = sign_agreement(grid)
    card = signs[(signs['predictor'] == 'cardinality') & (signs['model'] == QLS)]
    assert card['agrees'].all()

    empty = hypothesis_grid({}, {}, settings)
    assert empty.empty and 'adjusted_p' in empty.columns
    assert INDIV_PCQ not in set(grid['dependent'])


def test_spearman_p_value_matches_t_approximation():
    """Test the p-value uses the t distribution with n - 2 degrees of freedom."""
    rng = np.random.default_rng(8)
    x, y = rng.normal(size=30), rng.normal(size=30)
    rho, p = spearman(x, y)
    t = rho * np.sqrt(28 / (1 - rho ** 2))
    assert p == pytest.approx(2 * sps.t.sf(abs(t), 28), rel=1e-9)


def test_hypothesis_tests_bonferroni_counts_tests(group_features):
    """Test the correction uses the configured number of tests, not the coefficient count."""
    frame, target = group_features
    for m in (18, 9):
        settings = Settings({'BOOTSTRAP_RESAMPLES': '50', 'BONFERRONI_TESTS': str(m)})
        results = hypothesis_tests(frame, target, GROUP_PCQ, settings)
        for result in results:
            finite = np.isfinite(result.p_values)
            np.testing.assert_allclose(result.adjusted_p[finite], np.minimum(1.0, m * result.p_values[finite]))
