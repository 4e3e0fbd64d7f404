"""Turn segmentation and turn-taking features from binary speaking status."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Tuple

import numpy as np
import pandas as pd

from errors import UndefinedStatisticError

logger = logging.getLogger(__name__)

TT_FEATURES = (
    'd_speak', 'eq', 'd_silence', 'n_backchannels',
    'd_overlap', 'n_success_intr', 'n_unsuccess_intr',
)


@dataclass(frozen=True)
class TurnSequence:
    """Turns of one participant as half-open sample intervals [start, end)."""

    participant_id: str
    rate_hz: float
    turns: Tuple[Tuple[int, int], ...] = field(default_factory=tuple)
    backchannel_max_s: float = 2.0

    def __len__(self) -> int:
        return len(self.turns)

    def durations_s(self) -> np.ndarray:
        return np.array([end - start for start, end in self.turns], dtype=float) / self.rate_hz

    def is_backchannel(self) -> np.ndarray:
        # Tolerance keeps a turn of exactly the limit on the inclusive side.
        return self.durations_s() <= self.backchannel_max_s + 1e-9

    def to_frame(self) -> pd.DataFrame:
        flags = self.is_backchannel()
        return pd.DataFrame({
            'participant_id': [self.participant_id] * len(self.turns),
            'start': [s for s, _ in self.turns],
            'end': [e for _, e in self.turns],
            'is_backchannel': flags.astype(bool) if len(flags) else np.array([], dtype=bool),
        })


def speech_runs(status: np.ndarray) -> List[Tuple[int, int]]:
    """Maximal runs of 1s as [start, end) intervals."""
    status = np.asarray(status, dtype=np.int8)
    padded = np.concatenate(([0], status, [0]))
    edges = np.flatnonzero(np.diff(padded))
    return [(int(s), int(e)) for s, e in zip(edges[::2], edges[1::2])]


def segment_turns(
    status: np.ndarray,
    participant_id: str = '',
    rate_hz: float = 20.0,
    gap_threshold_ms: float = 500.0,
    backchannel_max_s: float = 2.0,
) -> TurnSequence:
    """Merge speech runs separated by at most the gap threshold into turns.

    Args:
        status: Binary speaking-status samples
        participant_id: Owner of the status
        rate_hz: Sample rate of ``status``
        gap_threshold_ms: Silences of at most this length do not end a turn
        backchannel_max_s: Turns of at most this length are back-channels

    Returns:
        TurnSequence with sorted, non-overlapping turns
    """
    gap = int(round(gap_threshold_ms / 1000.0 * rate_hz))
    turns: List[Tuple[int, int]] = []
    for start, end in speech_runs(status):
        if turns and start - turns[-1][1] <= gap:
            turns[-1] = (turns[-1][0], end)
        else:
            turns.append((start, end))
    return TurnSequence(participant_id, rate_hz, tuple(turns), backchannel_max_s)


def _stack(statuses: Mapping[str, np.ndarray]) -> Tuple[List[str], np.ndarray]:
    members = sorted(statuses)
    lengths = {len(statuses[m]) for m in members}
    if len(lengths) != 1:
        raise ValueError(f"speaking statuses differ in length: {sorted(lengths)}")
    return members, np.vstack([np.asarray(statuses[m], dtype=np.int8) for m in members])


def equality(statuses: Mapping[str, np.ndarray]) -> Dict[str, Dict[str, float]]:
    """Speaking fraction and degree of equality per member.

    eq = (d_speak - mean d_speak) / mean d_speak, so the values sum to 0.
    """
    members, stacked = _stack(statuses)
    if stacked.shape[1] == 0:
        raise UndefinedStatisticError('equality undefined for an empty interval')
    d_speak = stacked.mean(axis=1)
    d_mean = d_speak.mean()
    if not d_mean > 0:
        raise UndefinedStatisticError('equality undefined: nobody speaks')
    return {
        m: {'d_speak': float(d), 'eq': float((d - d_mean) / d_mean)}
        for m, d in zip(members, d_speak)
    }


def fluency(status: np.ndarray, turns: TurnSequence) -> Dict[str, float]:
    """Silence fraction and back-channel count of one member."""
    status = np.asarray(status)
    d_speak = float(status.mean()) if status.size else 0.0
    return {
        'd_silence': 1.0 - d_speak,
        'n_backchannels': float(turns.is_backchannel().sum()) if len(turns) else 0.0,
    }


def count_interruptions(interrupter: TurnSequence, interrupted: TurnSequence) -> Tuple[int, int]:
    """Successful and unsuccessful interruptions of ``interrupted`` by ``interrupter``.

    An interruption is a turn start strictly inside the partner's turn. It is
    successful when the partner's turn ends no later than the interrupting turn.
    """
    success = unsuccess = 0
    for j_start, j_end in interrupter.turns:
        for i_start, i_end in interrupted.turns:
            if i_start < j_start < i_end:
                if i_end <= j_end:
                    success += 1
                else:
                    unsuccess += 1
                break
    return success, unsuccess


def synchronization(
    statuses: Mapping[str, np.ndarray],
    turns: Mapping[str, TurnSequence],
    literal_overlap: bool = False,
) -> Dict[str, Dict[str, float]]:
    """Overlap fraction and interruption counts per member.

    Overlap is the fraction of samples where the member and at least one
    partner speak together. With ``literal_overlap`` it is the fraction where
    the member's status equals some partner's status, silence included.
    """
    members, stacked = _stack(statuses)
    if len(members) < 2:
        raise ValueError('synchronization needs at least 2 members')
    n = stacked.shape[1]
    result = {}
    for idx, member in enumerate(members):
        others = np.delete(stacked, idx, axis=0)
        own = stacked[idx]
        if literal_overlap:
            hit = (others == own).any(axis=0)
        else:
            hit = (own == 1) & (others == 1).any(axis=0)
        success = unsuccess = 0
        for other in members:
            if other == member:
                continue
            s, u = count_interruptions(turns[member], turns[other])
            success += s
            unsuccess += u
        result[member] = {
            'd_overlap': float(hit.mean()) if n else 0.0,
            'n_success_intr': float(success),
            'n_unsuccess_intr': float(unsuccess),
        }
    return result


def turn_features(
    statuses: Mapping[str, np.ndarray],
    rate_hz: float = 20.0,
    gap_threshold_ms: float = 500.0,
    backchannel_max_s: float = 2.0,
    literal_overlap: bool = False,
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Per-member turn-taking features for one slice.

    Returns:
        (features, turns): features indexed by participant_id with the
        TT_FEATURES columns, and the turn dump
    """
    turns = {
        pid: segment_turns(status, pid, rate_hz, gap_threshold_ms, backchannel_max_s)
        for pid, status in statuses.items()
    }
    try:
        eq = equality(statuses)
    except UndefinedStatisticError as e:
        logger.warning("equality undefined: %s", e)
        eq = {pid: {'d_speak': 0.0, 'eq': np.nan} for pid in statuses}
    sync = synchronization(statuses, turns, literal_overlap)

    rows = []
    for pid in sorted(statuses):
        row = {'participant_id': pid}
        row.update(eq[pid])
        row.update(fluency(statuses[pid], turns[pid]))
        row.update(sync[pid])
        rows.append(row)
    features = pd.DataFrame(rows).set_index('participant_id')[list(TT_FEATURES)]
    dump = pd.concat([t.to_frame() for t in turns.values()], ignore_index=True) if turns else pd.DataFrame()
    return features, dump
