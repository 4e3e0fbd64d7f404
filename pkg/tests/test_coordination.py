"""Test pairwise synchrony, causality and convergence features."""

import numpy as np
import pytest
from scipy import stats

from analysis.coordination import (
    CAUS_FEATURES,
    CONV_FEATURES,
    SYNC_FEATURES,
    CoordinationCalculator as calc,
    CoordinationParams,
    PairFeatureSet,
    pair_features,
)
from config.settings import Settings
from errors import InsufficientDataError, RankDeficiencyError, UndefinedStatisticError
from synth import gen_coupled_pair


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


# Pearson

def test_pearson_identity_and_sign(rng):
    """Test b = a gives 1 and b = -a gives -1."""
    a = rng.normal(size=100)
    assert calc.pearson(a, a) == pytest.approx(1.0)
    assert calc.pearson(a, -a) == pytest.approx(-1.0)


def test_pearson_matches_formula(rng):
    """Test against the covariance over standard deviations formula."""
    a, b = rng.normal(size=200), rng.normal(size=200)
    expected = np.cov(a, b)[0, 1] / (np.std(a, ddof=1) * np.std(b, ddof=1))
    assert abs(calc.pearson(a, b) - expected) < 1e-12


def test_pearson_errors():
    """Test constant and too-short inputs."""
    with pytest.raises(UndefinedStatisticError):
        calc.pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(InsufficientDataError):
        calc.pearson([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        calc.pearson([1.0, 2.0, 3.0], [1.0, 2.0, 3.0, 4.0])


# Lagged correlation

def test_lagged_correlation_planted_lag(rng):
    """Test b_t = a_{t-5} gives argmax 5."""
    x = rng.normal(size=505)
    a, b = x[5:], x[:-5]
    result = calc.lagged_correlation(a, b, 10)
    assert result['argmax'] == 5
    assert result['max'] == pytest.approx(1.0)


def test_lagged_correlation_identity(rng):
    """Test b = a peaks at lag 0."""
    a = rng.normal(size=300)
    result = calc.lagged_correlation(a, a, 10)
    assert result['argmax'] == 0
    assert result['max'] == pytest.approx(1.0)


def test_lagged_correlation_independent_noise():
    """Test independent noise has no strong peak."""
    rng = np.random.default_rng(11)
    result = calc.lagged_correlation(rng.normal(size=2000), rng.normal(size=2000), 10)
    assert abs(result['max']) < 0.2


def test_lagged_correlation_recovers_lag_on_coupled_pairs():
    """Test planted delays are recovered within one sample on 100 coupled pairs."""
    for seed in range(100):
        lag = 1 + seed % 10
        leader, follower = gen_coupled_pair(lag, 1.0, 0.0, 400, seed=seed)
        result = calc.lagged_correlation(leader[:, 0], follower[:, 0], 12)
        assert abs(result['argmax'] - lag) <= 1


def test_lagged_correlation_antisymmetric_argmax(rng):
    """Test swapping the pair negates a unique argmax."""
    x = rng.normal(size=403)
    a, b = x[3:], x[:-3]
    assert calc.lagged_correlation(a, b, 8)['argmax'] == -calc.lagged_correlation(b, a, 8)['argmax']


def test_lagged_correlation_too_short(rng):
    """Test series must be longer than 2L + 2."""
    with pytest.raises(InsufficientDataError):
        calc.lagged_correlation(rng.normal(size=22), rng.normal(size=22), 10)


# Mutual information

def test_mutual_information_self_is_entropy(rng):
    """Test MI of a series with itself is its binned entropy."""
    a = rng.normal(size=600)
    result = calc.mutual_information(a, a, bins=8, window=200)
    entropies = [stats.entropy(np.histogram(a[w * 200:(w + 1) * 200], bins=8)[0]) for w in range(3)]
    assert result['min'] == pytest.approx(min(entropies))
    assert result['max'] == pytest.approx(max(entropies))
    assert result['mean'] == pytest.approx(np.mean(entropies))


def test_mutual_information_independent_noise_small():
    """Test independent noise stays near the estimator bias."""
    rng = np.random.default_rng(5)
    a, b = rng.uniform(size=4000), rng.uniform(size=4000)
    bias = (8 - 1) ** 2 / (2 * 200)
    assert calc.mutual_information(a, b, bins=8, window=200)['mean'] < 2 * bias


def test_mutual_information_two_windows(rng):
    """Test mean and population variance over two windows."""
    a, b = rng.normal(size=100), rng.normal(size=100)
    m1 = calc.window_mutual_information(a[:50], b[:50], 8)
    m2 = calc.window_mutual_information(a[50:], b[50:], 8)
    result = calc.mutual_information(a, b, bins=8, window=50)
    assert result['mean'] == pytest.approx((m1 + m2) / 2)
    assert result['variance'] == pytest.approx(((m1 - m2) / 2) ** 2)


def test_mutual_information_needs_two_windows(rng):
    """Test fewer than two windows is rejected."""
    with pytest.raises(InsufficientDataError):
        calc.mutual_information(rng.normal(size=300), rng.normal(size=300), window=200)


# Mimicry

def test_mimicry_delayed_copy(rng):
    """Test a one-window delayed copy scores 1 in every window."""
    window = 20
    b = rng.normal(size=10 * window)
    a = np.concatenate([rng.normal(size=window), b[:-window]])
    result = calc.mimicry(a, b, window)
    assert result['lag_min'] == pytest.approx(1.0)
    assert result['lag_mean'] == pytest.approx(1.0)
    assert result['lag_variance'] == pytest.approx(0.0, abs=1e-12)


def test_mimicry_swap_exchanges_directions(rng):
    """Test swapping the inputs swaps lag and lead values."""
    a, b = rng.normal(size=500), rng.normal(size=500)
    forward, backward = calc.mimicry(a, b, 50), calc.mimicry(b, a, 50)
    for stat in ('min', 'max', 'mean', 'variance'):
        assert forward[f"lag_{stat}"] == backward[f"lead_{stat}"]
        assert forward[f"lead_{stat}"] == backward[f"lag_{stat}"]


def test_mimicry_independent_noise():
    """Test independent noise has a small mean mimicry score."""
    rng = np.random.default_rng(8)
    result = calc.mimicry(rng.normal(size=50 * 40), rng.normal(size=50 * 40), 40)
    assert abs(result['lag_mean']) < 0.2
    assert abs(result['lead_mean']) < 0.2


def test_mimicry_constant_windows_skipped(rng):
    """Test constant windows are skipped and an all-constant input fails."""
    a = rng.normal(size=200)
    b = rng.normal(size=200)
    b[:50] = 1.0
    result = calc.mimicry(a, b, 50)
    assert np.isfinite(result['lag_mean'])
    with pytest.raises(UndefinedStatisticError):
        calc.mimicry(np.ones(200), np.ones(200), 50)
    with pytest.raises(InsufficientDataError):
        calc.mimicry(a[:100], b[:100], 50)


# Coherence

def test_coherence_identity(rng):
    """Test b = a has coherence 1 at every bin."""
    a = rng.normal(size=800)
    result = calc.coherence(a, a, 80)
    assert result['min'] == pytest.approx(1.0, abs=1e-9)
    assert result['max'] == pytest.approx(1.0, abs=1e-9)


def test_coherence_pure_delay(rng):
    """Test a pure delay keeps coherence near 1."""
    x = rng.normal(size=4002)
    result = calc.coherence(x[2:], x[:-2], 80)
    assert result['min'] > 0.95


def test_coherence_independent_noise():
    """Test independent noise has low coherence with many segments."""
    rng = np.random.default_rng(9)
    result = calc.coherence(rng.normal(size=4000), rng.normal(size=4000), 80)
    assert result['max'] < 0.6


def test_coherence_errors(rng):
    """Test short input and zero power."""
    with pytest.raises(InsufficientDataError):
        calc.coherence(rng.normal(size=100), rng.normal(size=100), 80)
    with pytest.raises(UndefinedStatisticError):
        calc.coherence(np.zeros(400), rng.normal(size=400), 80)


# Granger causality

def test_granger_direction():
    """Test b driven by lagged a gives a large forward and small reverse F."""
    rng = np.random.default_rng(0)
    a = rng.normal(size=1000)
    b = np.zeros(1000)
    b[1:] = 0.8 * a[:-1]
    b += rng.normal(size=1000)
    assert calc.granger(a, b, 2) > 50
    assert calc.granger(b, a, 2) < 5


def test_granger_directionality_on_coupled_pairs():
    """Test F(a->b) > F(b->a) on at least 95 of 100 coupled pairs."""
    wins = 0
    for seed in range(100):
        leader, follower = gen_coupled_pair(1, 0.8, 1.0, 1000, seed=seed)
        wins += calc.granger(leader[:, 0], follower[:, 0], 2) > calc.granger(follower[:, 0], leader[:, 0], 2)
    assert wins >= 95


def test_granger_independent_below_f_quantile():
    """Test independent series stay below the F 99th percentile in most trials."""
    order, n = 2, 300
    threshold = stats.f.ppf(0.99, order, n - order - 2 * order - 1)
    below = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        below += calc.granger(rng.normal(size=n), rng.normal(size=n), order) < threshold
    assert below >= 95


def test_granger_constant_cause(rng):
    """Test a constant cause is rank deficient."""
    with pytest.raises(RankDeficiencyError):
        calc.granger(np.ones(200), rng.normal(size=200), 2)
    with pytest.raises(InsufficientDataError):
        calc.granger(rng.normal(size=16), rng.normal(size=16), 2)


def test_granger_scale_invariant(rng):
    """Test positive scaling leaves F unchanged."""
    a, b = rng.normal(size=400), rng.normal(size=400)
    b[1:] += 0.5 * a[:-1]
    assert calc.granger(3.0 * a, 0.5 * b, 2) == pytest.approx(calc.granger(a, b, 2), rel=1e-6)


# Convergence

def test_symmetric_convergence_linear():
    """Test a linearly shrinking distance gives -1."""
    T = 100
    t = np.arange(T + 1, dtype=float)
    assert calc.symmetric_convergence(t, 2 * T - t) == pytest.approx(-1.0)


def test_symmetric_convergence_noise_and_divergence(rng):
    """Test constant-plus-noise distance and a diverging pair."""
    n = 1000
    base = rng.normal(size=n)
    assert abs(calc.symmetric_convergence(base, base + 5.0 + 0.1 * rng.normal(size=n))) < 0.2
    assert calc.symmetric_convergence(np.arange(n) + rng.normal(size=n), np.zeros(n)) > 0.9


def test_symmetric_convergence_constant_difference():
    """Test a constant difference is undefined."""
    b = np.arange(10.0)
    with pytest.raises(UndefinedStatisticError):
        calc.symmetric_convergence(b + 3.0, b)


def test_asymmetric_convergence_drift():
    """Test a drift onto a constant partner gives lag -1."""
    a = np.linspace(5.0, 0.0, 101)
    b = np.zeros(101)
    result = calc.asymmetric_convergence(a, b)
    assert result['lag'] == pytest.approx(-1.0, abs=1e-6)
    assert np.isnan(result['lead'])


def test_asymmetric_convergence_stationary_and_swap():
    """Test a stationary pair and the lag/lead swap."""
    rng = np.random.default_rng(4)
    a, b = rng.normal(size=2000), rng.normal(size=2000)
    forward, backward = calc.asymmetric_convergence(a, b), calc.asymmetric_convergence(b, a)
    assert abs(forward['lag']) < 0.25
    assert forward['lag'] == backward['lead']
    assert forward['lead'] == backward['lag']
    with pytest.raises(UndefinedStatisticError):
        calc.asymmetric_convergence(np.ones(10), np.ones(10))


def test_global_convergence():
    """Test identical signals and a halved distance."""
    a = np.arange(10.0)
    assert calc.global_convergence(a, a) == 0.0
    b = np.array([2.0] * 5 + [1.0] * 5)
    assert calc.global_convergence(np.zeros(10), b) == pytest.approx(1.0)


def test_global_convergence_brute_force(rng):
    """Test against a direct two-half computation, odd length included."""
    for n in (200, 201):
        a, b = rng.normal(size=n), rng.normal(size=n)
        half = n // 2
        d1 = sum(abs(a[t] - b[t]) for t in range(half)) / half
        d2 = sum(abs(a[t] - b[t]) for t in range(n - half, n)) / half
        assert abs(calc.global_convergence(a, b) - (d1 - d2)) < 1e-12


# Invariants

def test_symmetric_features_swap_invariant(rng):
    """Test swap invariance of symmetric features."""
    for _ in range(20):
        a, b = rng.normal(size=400), rng.normal(size=400)
        assert calc.pearson(a, b) == pytest.approx(calc.pearson(b, a))
        assert calc.mutual_information(a, b, 8, 100)['mean'] == pytest.approx(calc.mutual_information(b, a, 8, 100)['mean'])
        assert calc.coherence(a, b, 40)['max'] == pytest.approx(calc.coherence(b, a, 40)['max'])
        assert calc.symmetric_convergence(a, b) == pytest.approx(calc.symmetric_convergence(b, a))
        assert calc.global_convergence(a, b) == pytest.approx(calc.global_convergence(b, a))


def test_positive_scaling_invariance(rng):
    """Test affine invariance of correlation-type features."""
    for _ in range(20):
        a, b = rng.normal(size=300), rng.normal(size=300)
        assert calc.pearson(2.5 * a, b) == pytest.approx(calc.pearson(a, b))
        scaled = calc.lagged_correlation(a, 4.0 * b, 5)
        plain = calc.lagged_correlation(a, b, 5)
        assert scaled['max'] == pytest.approx(plain['max'])
        assert scaled['argmax'] == plain['argmax']
        assert calc.coherence(7.0 * a, b, 40)['min'] == pytest.approx(calc.coherence(a, b, 40)['min'])


def test_pair_feature_ranges():
    """Test value ranges over random pairs."""
    params = CoordinationParams(max_lag=10, mi_bins=6, mi_window=50, mimicry_window=25,
                                granger_order=2, coherence_segment=32)
    for seed in range(200):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=200)
        b = 0.5 * np.roll(a, seed % 7) + rng.normal(size=200)
        values = pair_features(('P1', 'P2'), 'raw_x', a, b, params).values
        for name in ('corr', 'lagcorr_min', 'lagcorr_max', 'mimicry_lag_mean', 'mimicry_lead_mean', 'symconv_rho'):
            assert -1.0 <= values[name] <= 1.0
        for name in ('mi_min', 'mi_max', 'mi_mean'):
            assert values[name] >= 0.0
        assert 0.0 <= values['coherence_min'] <= values['coherence_max'] <= 1.0
        assert values['granger_f_out'] >= 0.0 and values['granger_f_in'] >= 0.0
        assert -10 <= values['lagcorr_argmax'] <= 10


# Pair feature sets

def test_pair_features_covers_every_name(rng):
    """Test every feature is present, with NaN when a series is too short."""
    a, b = rng.normal(size=30), rng.normal(size=30)
    result = pair_features(('P1', 'P2'), 'euclid_norm', a, b, CoordinationParams())
    assert set(result.values) == set(SYNC_FEATURES) | set(CAUS_FEATURES) | set(CONV_FEATURES)
    assert np.isfinite(result.values['corr'])
    assert np.isnan(result.values['mi_mean'])
    assert np.isnan(result.values['coherence_max'])


def test_pair_features_selected_sets(rng):
    """Test only requested feature sets are computed."""
    a, b = rng.normal(size=400), rng.normal(size=400)
    result = pair_features(('P1', 'P2'), 'raw_x', a, b, CoordinationParams(), ['conv'])
    assert set(result.values) == set(CONV_FEATURES)


def test_swapped_view(rng):
    """Test the second member's view swaps directional features."""
    a, b = rng.normal(size=600), rng.normal(size=600)
    params = CoordinationParams(max_lag=10, mi_window=100, mimicry_window=50, coherence_segment=40)
    forward = pair_features(('P1', 'P2'), 'raw_x', a, b, params)
    backward = pair_features(('P2', 'P1'), 'raw_x', b, a, params)
    swapped = forward.swapped()
    assert swapped.pair == ('P2', 'P1')
    for name in ('granger_f_out', 'granger_f_in', 'mimicry_lag_mean', 'mimicry_lead_max', 'asymconv_lag', 'corr'):
        assert swapped.values[name] == pytest.approx(backward.values[name])
    assert swapped.values['lagcorr_argmax'] == -forward.values['lagcorr_argmax']
    assert isinstance(swapped, PairFeatureSet)


def test_params_from_settings():
    """Test durations convert to samples at the series rate."""
    params = CoordinationParams.from_settings(Settings(), 20.0)
    assert params.max_lag == 60
    assert params.mi_window == 200
    assert params.mimicry_window == 100
    assert params.coherence_segment == 80
    slow = CoordinationParams.from_settings(Settings(), 0.5)
    assert slow.max_lag == 2
    assert slow.mi_window == 5
    assert slow.mimicry_window == 3
    assert slow.coherence_segment == 4
