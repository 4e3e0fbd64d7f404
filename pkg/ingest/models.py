"""Domain types for recordings, groups, slices and annotations.

All structures are immutable once built: array fields are made read-only so
they can be shared across parallel workers.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from errors import DomainError, ValidationError
from .questionnaire import GROUP, INDIVIDUAL, LEVELS, LIKERT_MAX, LIKERT_MIN, QuestionItem


def _frozen(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class AccelRecording:
    """Tri-axial acceleration of one participant on an integer sample clock."""

    participant_id: str
    sample_rate_hz: float
    t: np.ndarray
    xyz: np.ndarray

    def __post_init__(self):
        t = _frozen(self.t, np.int64)
        xyz = _frozen(self.xyz, float)
        if self.sample_rate_hz <= 0:
            raise DomainError(f"{self.participant_id}: sample_rate_hz must be > 0")
        if xyz.ndim != 2 or xyz.shape[1] != 3 or xyz.shape[0] != t.shape[0]:
            raise ValidationError(f"{self.participant_id}: every sample needs ax, ay, az")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValidationError(f"{self.participant_id}: sample indices must be strictly increasing")
        object.__setattr__(self, 't', t)
        object.__setattr__(self, 'xyz', xyz)

    def __len__(self) -> int:
        return int(self.t.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AccelRecording):
            return NotImplemented
        return (
            self.participant_id == other.participant_id
            and self.sample_rate_hz == other.sample_rate_hz
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.xyz, other.xyz)
        )

    def axis(self, name: str) -> np.ndarray:
        return self.xyz[:, 'xyz'.index(name)]

    def gaps(self) -> List[Tuple[int, int]]:
        """(last index before the gap, number of missing samples) per gap."""
        if self.t.size < 2:
            return []
        steps = np.diff(self.t)
        where = np.flatnonzero(steps > 1)
        return [(int(self.t[i]), int(steps[i] - 1)) for i in where]

    def window(self, start_t: int, end_t: int) -> 'AccelRecording':
        """Samples with start_t <= t < end_t."""
        mask = (self.t >= start_t) & (self.t < end_t)
        return AccelRecording(self.participant_id, self.sample_rate_hz, self.t[mask], self.xyz[mask])

    def with_values(self, xyz: np.ndarray) -> 'AccelRecording':
        return AccelRecording(self.participant_id, self.sample_rate_hz, self.t, xyz)


@dataclass(frozen=True, eq=False)
class SpeakingStatus:
    """Binary speaking status of one participant starting at clock index t0."""

    participant_id: str
    rate_hz: float
    status: np.ndarray
    t0: int = 0

    def __post_init__(self):
        status = np.asarray(self.status)
        if status.size and not np.isin(status, (0, 1)).all():
            bad = status[~np.isin(status, (0, 1))][0]
            raise DomainError(f"{self.participant_id}: speaking status must be 0 or 1, got {bad}")
        if self.rate_hz <= 0:
            raise DomainError(f"{self.participant_id}: rate_hz must be > 0")
        object.__setattr__(self, 'status', _frozen(status, np.int8))

    def __len__(self) -> int:
        return int(self.status.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpeakingStatus):
            return NotImplemented
        return (
            self.participant_id == other.participant_id
            and self.rate_hz == other.rate_hz
            and self.t0 == other.t0
            and np.array_equal(self.status, other.status)
        )

    def window(self, start_t: int, end_t: int) -> 'SpeakingStatus':
        lo = max(start_t - self.t0, 0)
        hi = max(min(end_t - self.t0, self.status.size), lo)
        return SpeakingStatus(self.participant_id, self.rate_hz, self.status[lo:hi], self.t0 + lo)


@dataclass(frozen=True)
class ConversationGroup:
    """A free-standing conversation group over a time span [start_t, end_t)."""

    group_id: str
    member_ids: Tuple[str, ...]
    start_t: int
    end_t: int

    def __post_init__(self):
        members = tuple(sorted(set(self.member_ids)))
        if len(members) < 2:
            raise ValidationError(f"group {self.group_id}: needs at least 2 members", [self.group_id])
        if self.end_t <= self.start_t:
            raise ValidationError(f"group {self.group_id}: end_t must be after start_t", [self.group_id])
        object.__setattr__(self, 'member_ids', members)

    @property
    def cardinality(self) -> int:
        return len(self.member_ids)

    def duration_s(self, rate_hz: float) -> float:
        return (self.end_t - self.start_t) / rate_hz


@dataclass(frozen=True)
class ConversationSlice:
    """Thin slice of a group: the unit of annotation and feature extraction."""

    slice_id: str
    group_id: str
    member_ids: Tuple[str, ...]
    start_t: int
    end_t: int
    duration_s: float

    @property
    def cardinality(self) -> int:
        return len(self.member_ids)

    def pairs(self) -> List[Tuple[str, str]]:
        """Unordered member pairs in sorted order."""
        members = self.member_ids
        return [(members[i], members[j]) for i in range(len(members)) for j in range(i + 1, len(members))]


@dataclass(frozen=True, eq=False)
class AnnotationSet:
    """Ordinal ratings (1..5) per rater, slice and, at individual level, participant.

    ``frame`` has columns ``rater_id, slice_id, participant_id`` followed by one
    column per questionnaire item; ``participant_id`` is empty at group level.
    """

    level: str
    items: Tuple[QuestionItem, ...]
    frame: pd.DataFrame = field(repr=False)

    def __post_init__(self):
        if self.level not in LEVELS:
            raise DomainError(f"Unknown annotation level: {self.level!r}")
        values = self.frame[self.item_ids].to_numpy()
        if values.size and ((values < LIKERT_MIN) | (values > LIKERT_MAX)).any():
            raise DomainError(f"ratings must lie in {LIKERT_MIN}..{LIKERT_MAX}")
        if self.level == INDIVIDUAL and (self.frame['participant_id'] == '').any():
            raise ValidationError('individual-level ratings must name a participant')
        frame = self.frame.sort_values(['rater_id', 'slice_id', 'participant_id'], kind='mergesort')
        object.__setattr__(self, 'frame', frame.reset_index(drop=True))

    def __eq__(self, other) -> bool:
        if not isinstance(other, AnnotationSet):
            return NotImplemented
        return (
            self.level == other.level
            and self.items == other.items
            and self.frame.reset_index(drop=True).equals(other.frame.reset_index(drop=True))
        )

    @property
    def item_ids(self) -> List[str]:
        return [item.item_id for item in self.items]

    @property
    def negative_flags(self) -> List[bool]:
        return [item.is_negative for item in self.items]

    @property
    def raters(self) -> List[str]:
        return sorted(self.frame['rater_id'].unique())

    @property
    def n_ratings(self) -> int:
        return int(self.frame[self.item_ids].size)

    @property
    def key_columns(self) -> List[str]:
        return ['slice_id'] if self.level == GROUP else ['slice_id', 'participant_id']

    def sample_keys(self) -> List[Tuple[str, ...]]:
        keys = self.frame[self.key_columns].drop_duplicates()
        return [tuple(row) for row in keys.itertuples(index=False)]

    def ratings(self) -> Dict[Tuple[str, ...], np.ndarray]:
        """Map (rater_id, slice_id[, participant_id]) to the item vector."""
        keys = ['rater_id'] + self.key_columns
        result = {}
        for row in self.frame[keys + self.item_ids].itertuples(index=False):
            result[tuple(row[:len(keys)])] = np.asarray(row[len(keys):], dtype=int)
        return result

    def subset(self, keys) -> 'AnnotationSet':
        """Keep only rows whose sample key is in ``keys``."""
        wanted = set(tuple(k) for k in keys)
        mask = [tuple(r) in wanted for r in self.frame[self.key_columns].itertuples(index=False)]
        return AnnotationSet(self.level, self.items, self.frame[mask])
