"""Test turn segmentation and turn-taking features."""

import numpy as np
import pytest

from analysis.turntaking import (
    TT_FEATURES,
    TurnSequence,
    count_interruptions,
    equality,
    fluency,
    segment_turns,
    speech_runs,
    synchronization,
    turn_features,
)
from errors import UndefinedStatisticError


def status_from(*pieces):
    """Build a status from alternating (value, length) pieces."""
    return np.concatenate([np.full(length, value, dtype=np.int8) for value, length in pieces])


def test_short_gap_merges():
    """Test a 400 ms gap at 20 Hz merges into one 88-sample turn."""
    status = status_from((1, 40), (0, 8), (1, 40))
    turns = segment_turns(status, 'P1', 20.0, 500.0)
    assert turns.turns == ((0, 88),)


def test_long_gap_splits():
    """Test a 600 ms gap keeps two turns."""
    status = status_from((1, 40), (0, 12), (1, 40))
    turns = segment_turns(status, 'P1', 20.0, 500.0)
    assert turns.turns == ((0, 40), (52, 92))


def test_gap_at_threshold_merges():
    """Test a gap of exactly the threshold merges."""
    status = status_from((1, 5), (0, 10), (1, 5))
    assert len(segment_turns(status, 'P1', 20.0, 500.0)) == 1


def test_speech_runs_edges():
    """Test runs touching both ends and an all-silent status."""
    assert speech_runs(np.array([1, 1, 0, 1])) == [(0, 2), (3, 4)]
    assert speech_runs(np.zeros(5)) == []


def test_segment_matches_brute_force():
    """Test merging against a sample-by-sample scan on random statuses."""
    rng = np.random.default_rng(3)
    gap = 10
    for _ in range(100):
        status = (rng.random(400) < 0.3).astype(np.int8)
        expected = []
        start = last_end = None
        for t, s in enumerate(status):
            if s:
                if start is None:
                    start = t
                elif t - last_end > gap:
                    expected.append((start, last_end))
                    start = t
                last_end = t + 1
        if start is not None:
            expected.append((start, last_end))
        assert list(segment_turns(status, 'P1', 20.0, 500.0).turns) == expected


def test_turn_invariants():
    """Test turns are sorted, disjoint and cover every speaking sample."""
    rng = np.random.default_rng(9)
    for _ in range(50):
        status = (rng.random(300) < 0.5).astype(np.int8)
        turns = segment_turns(status, 'P1', 20.0, 500.0).turns
        for (s1, e1), (s2, _) in zip(turns, turns[1:]):
            assert s1 < e1 <= s2
        covered = np.zeros(300, dtype=bool)
        for start, end in turns:
            covered[start:end] = True
        assert covered[status == 1].all()


def test_equality_example():
    """Test speaking fractions 0.6 and 0.4 give +0.2 and -0.2."""
    statuses = {'P1': status_from((1, 6), (0, 4)), 'P2': status_from((1, 4), (0, 6))}
    result = equality(statuses)
    assert result['P1']['eq'] == pytest.approx(0.2)
    assert result['P2']['eq'] == pytest.approx(-0.2)
    assert result['P1']['d_speak'] == pytest.approx(0.6)


def test_equality_sums_to_zero():
    """Test equality values sum to zero."""
    rng = np.random.default_rng(1)
    for _ in range(30):
        statuses = {f"P{k}": (rng.random(200) < rng.random()).astype(np.int8) for k in range(4)}
        if not any(s.any() for s in statuses.values()):
            continue
        assert abs(sum(v['eq'] for v in equality(statuses).values())) < 1e-9


def test_equality_undefined():
    """Test silence and empty intervals are undefined."""
    with pytest.raises(UndefinedStatisticError):
        equality({'P1': np.zeros(10), 'P2': np.zeros(10)})
    with pytest.raises(UndefinedStatisticError):
        equality({'P1': np.zeros(0), 'P2': np.zeros(0)})
    with pytest.raises(ValueError):
        equality({'P1': np.zeros(10), 'P2': np.zeros(9)})


def test_backchannel_count_inclusive():
    """Test turns of 1.5 s and 2.0 s count, 2.5 s does not."""
    status = status_from((1, 30), (0, 20), (1, 40), (0, 20), (1, 50))
    turns = segment_turns(status, 'P1', 20.0, 500.0, 2.0)
    assert len(turns) == 3
    assert fluency(status, turns)['n_backchannels'] == 2.0
    assert fluency(status, turns)['d_silence'] == pytest.approx(40 / 160)


def test_fluency_silent_member():
    """Test a silent member has full silence and no back-channels."""
    status = np.zeros(20, dtype=np.int8)
    result = fluency(status, segment_turns(status, 'P1'))
    assert result == {'d_silence': 1.0, 'n_backchannels': 0.0}


def test_successful_interruption():
    """Test starting inside and outlasting a partner turn."""
    i = TurnSequence('P1', 20.0, ((0, 100),))
    j = TurnSequence('P2', 20.0, ((50, 150),))
    assert count_interruptions(j, i) == (1, 0)
    assert count_interruptions(i, j) == (0, 0)


def test_unsuccessful_interruption():
    """Test a turn that ends before the interrupted turn."""
    i = TurnSequence('P1', 20.0, ((0, 100),))
    j = TurnSequence('P2', 20.0, ((40, 60),))
    assert count_interruptions(j, i) == (0, 1)


def test_simultaneous_start_not_interruption():
    """Test equal start samples are not interruptions."""
    i = TurnSequence('P1', 20.0, ((10, 100),))
    j = TurnSequence('P2', 20.0, ((10, 50),))
    assert count_interruptions(j, i) == (0, 0)
    assert count_interruptions(i, j) == (0, 0)


def test_overlap_modes():
    """Test concurrent speech overlap and literal status agreement."""
    statuses = {'P1': np.array([1, 1, 0, 0]), 'P2': np.array([1, 0, 1, 0])}
    turns = {pid: segment_turns(s, pid, 20.0, 0.0) for pid, s in statuses.items()}
    assert synchronization(statuses, turns)['P1']['d_overlap'] == pytest.approx(0.25)
    assert synchronization(statuses, turns, literal_overlap=True)['P1']['d_overlap'] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        synchronization({'P1': statuses['P1']}, turns)


def test_turn_features_table():
    """Test the per-member table and the turn dump."""
    statuses = {
        'P2': status_from((0, 50), (1, 100), (0, 50)),
        'P1': status_from((1, 100), (0, 100)),
    }
    features, dump = turn_features(statuses)
    assert list(features.index) == ['P1', 'P2']
    assert list(features.columns) == list(TT_FEATURES)
    assert features.loc['P2', 'n_success_intr'] == 1.0
    assert features.loc['P1', 'd_overlap'] == pytest.approx(0.25)
    assert set(dump.columns) == {'participant_id', 'start', 'end', 'is_backchannel'}
    assert len(dump) == 2
    rows = features.to_numpy()
    assert (rows[:, list(TT_FEATURES).index('d_speak')] >= 0).all()


def test_turn_features_silent_group():
    """Test a silent slice keeps the row with undefined equality."""
    statuses = {'P1': np.zeros(100, dtype=np.int8), 'P2': np.zeros(100, dtype=np.int8)}
    features, _ = turn_features(statuses)
    assert features['eq'].isna().all()
    assert (features['d_silence'] == 1.0).all()
