"""Loaders and writers for the delimited input formats.

Formats (comma-separated, header row, UTF-8, LF):
  accel       participant_id,t,ax,ay,az
  speaking    participant_id,t,status
  groups      group_id,member_ids,start_t,end_t   (member_ids joined by ';')
  annotations rater_id,slice_id[,participant_id],item_1..item_K
"""

import logging
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from errors import DomainError, ParseError, SchemaError, ValidationError
from .models import AccelRecording, AnnotationSet, ConversationGroup, ConversationSlice, SpeakingStatus
from .questionnaire import GROUP, INDIVIDUAL, LIKERT_MAX, LIKERT_MIN, QuestionItem, default_items

logger = logging.getLogger(__name__)

ACCEL_COLUMNS = ['participant_id', 't', 'ax', 'ay', 'az']
SPEAKING_COLUMNS = ['participant_id', 't', 'status']
GROUP_COLUMNS = ['group_id', 'member_ids', 'start_t', 'end_t']


def _read_table(path, required: Sequence[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Input file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=True, comment='#')
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: file is empty")
    except pd.errors.ParserError as e:
        raise ParseError(str(path), 0, str(e))
    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    if frame.empty:
        raise SchemaError(f"{path}: no data rows")
    return frame


def _numeric(frame: pd.DataFrame, column: str, path, integer: bool = False) -> np.ndarray:
    """Convert a string column, failing on the first malformed row with its line number."""
    values = pd.to_numeric(frame[column].str.strip(), errors='coerce')
    bad = values.isna() | ~np.isfinite(values.astype(float))
    if integer:
        bad |= values.notna() & (values != values.round())
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        # header is line 1
        raise ParseError(str(path), row + 2, f"non-numeric {column} value {frame[column].iloc[row]!r}")
    return values.to_numpy(dtype=np.int64 if integer else float)


def _reject_duplicates(frame: pd.DataFrame, path) -> None:
    dup = frame.duplicated(subset=['participant_id', 't'])
    if dup.any():
        row = int(np.flatnonzero(dup.to_numpy())[0])
        raise ValidationError(
            f"{path}, line {row + 2}: duplicate sample for participant "
            f"{frame['participant_id'].iloc[row]} at t={frame['t'].iloc[row]}",
            [frame['participant_id'].iloc[row]],
        )


def to_clock(t: np.ndarray, values: np.ndarray, rate_hz: float, clock_rate_hz: float):
    """Resample a series from its own rate onto the common clock (nearest neighbour)."""
    if rate_hz == clock_rate_hz or t.size == 0:
        return t, values
    ratio = clock_rate_hz / rate_hz
    source = t * ratio
    grid = np.arange(int(np.ceil(source[0])), int(np.floor(source[-1])) + 1, dtype=np.int64)
    right = np.clip(np.searchsorted(source, grid), 1, source.size - 1) if source.size > 1 else np.zeros_like(grid)
    if source.size > 1:
        left = right - 1
        nearest = np.where(np.abs(source[left] - grid) <= np.abs(source[right] - grid), left, right)
    else:
        nearest = right
    return grid, values[nearest]


def load_accel(path, sample_rate: float = 20.0, clock_rate: Optional[float] = None) -> Dict[str, AccelRecording]:
    """Load tri-axial accelerometer samples, one recording per participant.

    Args:
        path: Delimited accel file
        sample_rate: Rate of the ``t`` index in the file (Hz)
        clock_rate: Common clock rate; samples are resampled onto it when different

    Returns:
        Dictionary mapping participant_id to AccelRecording
    """
    frame = _read_table(path, ACCEL_COLUMNS)
    frame['participant_id'] = frame['participant_id'].str.strip()
    t = _numeric(frame, 't', path, integer=True)
    axes = np.column_stack([_numeric(frame, c, path) for c in ('ax', 'ay', 'az')])
    frame['t'] = t
    _reject_duplicates(frame, path)

    clock_rate = clock_rate or sample_rate
    recordings = {}
    for pid, index in frame.groupby('participant_id', sort=True).indices.items():
        order = index[np.argsort(t[index], kind='mergesort')]
        pt, pxyz = to_clock(t[order], axes[order], sample_rate, clock_rate)
        recording = AccelRecording(pid, clock_rate, pt, pxyz)
        for after, missing in recording.gaps():
            logger.warning("accel %s: %d missing samples after t=%d", pid, missing, after)
        recordings[pid] = recording
    logger.info("Loaded accelerometer data for %d participants from %s", len(recordings), path)
    return recordings


def load_speaking(path, rate: float = 20.0, clock_rate: Optional[float] = None) -> Dict[str, SpeakingStatus]:
    """Load binary speaking status, one aligned sequence per participant."""
    frame = _read_table(path, SPEAKING_COLUMNS)
    frame['participant_id'] = frame['participant_id'].str.strip()
    t = _numeric(frame, 't', path, integer=True)
    status = _numeric(frame, 'status', path)
    bad = ~np.isin(status, (0, 1))
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise DomainError(f"{path}, line {row + 2}: speaking status must be 0 or 1, got {frame['status'].iloc[row]}")
    frame['t'] = t
    _reject_duplicates(frame, path)

    clock_rate = clock_rate or rate
    statuses = {}
    for pid, index in frame.groupby('participant_id', sort=True).indices.items():
        order = index[np.argsort(t[index], kind='mergesort')]
        pt, ps = to_clock(t[order], status[order].astype(np.int8), rate, clock_rate)
        if pt.size > 1 and np.any(np.diff(pt) != 1):
            raise ValidationError(f"{path}: speaking status of {pid} has gaps", [pid])
        statuses[pid] = SpeakingStatus(pid, clock_rate, ps, int(pt[0]))

    spans = {pid: (s.t0, len(s)) for pid, s in statuses.items()}
    reference = Counter(spans.values()).most_common(1)[0][0]
    offending = sorted(pid for pid, span in spans.items() if span != reference)
    if offending:
        raise ValidationError(
            f"{path}: speaking sequences differ in length or start for {offending}", offending
        )
    logger.info("Loaded speaking status for %d participants from %s", len(statuses), path)
    return statuses


def load_groups(path) -> List[ConversationGroup]:
    """Load conversation groups (member ids joined by ';')."""
    frame = _read_table(path, GROUP_COLUMNS)
    start = _numeric(frame, 'start_t', path, integer=True)
    end = _numeric(frame, 'end_t', path, integer=True)
    groups = []
    for row, (gid, members) in enumerate(zip(frame['group_id'], frame['member_ids'])):
        ids = [m.strip() for m in members.split(';') if m.strip()]
        try:
            groups.append(ConversationGroup(gid.strip(), tuple(ids), int(start[row]), int(end[row])))
        except ValidationError as e:
            raise ParseError(str(path), row + 2, str(e))
    duplicated = pd.Series([g.group_id for g in groups]).duplicated()
    if duplicated.any():
        raise ValidationError(f"{path}: duplicate group ids", [groups[i].group_id for i in np.flatnonzero(duplicated)])
    logger.info("Loaded %d conversation groups from %s", len(groups), path)
    return groups


def load_annotations(path, level: str, items: Optional[Sequence[QuestionItem]] = None) -> AnnotationSet:
    """Load questionnaire ratings for one level.

    Args:
        path: Delimited annotation file
        level: 'group' or 'individual'
        items: Item catalog (default: the PCQ questionnaire for ``level``)

    Returns:
        Validated AnnotationSet
    """
    catalog = tuple(items) if items else default_items(level)
    required = ['rater_id', 'slice_id'] + (['participant_id'] if level == INDIVIDUAL else [])
    frame = _read_table(path, required)
    known = {item.item_id: item for item in catalog}

    item_columns = [c for c in frame.columns if c not in ('rater_id', 'slice_id', 'participant_id')]
    unknown = [c for c in item_columns if c not in known]
    if unknown:
        raise SchemaError(f"{path}: unknown item ids {unknown}")
    if not item_columns:
        raise SchemaError(f"{path}: no item columns")
    present = tuple(item for item in catalog if item.item_id in item_columns)

    for column in item_columns:
        values = _numeric(frame, column, path, integer=True)
        out = (values < LIKERT_MIN) | (values > LIKERT_MAX)
        if out.any():
            row = int(np.flatnonzero(out)[0])
            raise DomainError(
                f"{path}, line {row + 2}: rating {values[row]} for {column} outside {LIKERT_MIN}..{LIKERT_MAX}"
            )
        frame[column] = values

    if 'participant_id' not in frame.columns:
        frame['participant_id'] = ''
    if level == GROUP:
        frame['participant_id'] = ''
    for column in ('rater_id', 'slice_id', 'participant_id'):
        frame[column] = frame[column].str.strip()

    keys = ['rater_id', 'slice_id', 'participant_id']
    dup = frame.duplicated(subset=keys)
    if dup.any():
        row = int(np.flatnonzero(dup.to_numpy())[0])
        raise ValidationError(f"{path}, line {row + 2}: duplicate rating row")

    result = AnnotationSet(level, present, frame[keys + [i.item_id for i in present]])
    logger.info("Loaded %d %s-level ratings from %s", result.n_ratings, level, path)
    return result


def cross_validate(
    groups: Iterable[ConversationGroup],
    accel: Optional[Dict[str, AccelRecording]] = None,
    speaking: Optional[Dict[str, SpeakingStatus]] = None,
    slices: Optional[Iterable[ConversationSlice]] = None,
    annotations: Iterable[AnnotationSet] = (),
) -> Dict[str, List[str]]:
    """Report participant ids that are not referenced consistently across inputs.

    Returns:
        Dictionary of orphan categories to sorted id lists
    """
    groups = list(groups)
    members = {m for g in groups for m in g.member_ids}
    orphans: Dict[str, List[str]] = {}
    if accel is not None:
        orphans['members_without_accel'] = sorted(members - set(accel))
        orphans['accel_without_group'] = sorted(set(accel) - members)
    if speaking is not None:
        orphans['members_without_speaking'] = sorted(members - set(speaking))
        orphans['speaking_without_group'] = sorted(set(speaking) - members)

    slice_members = {s.slice_id: set(s.member_ids) for s in (slices or [])}
    for annotation in annotations:
        if not slice_members:
            break
        unknown_slices = sorted(set(annotation.frame['slice_id']) - set(slice_members))
        orphans[f"{annotation.level}_annotation_unknown_slices"] = unknown_slices
        if annotation.level == INDIVIDUAL:
            bad = sorted(
                f"{sid}:{pid}"
                for sid, pid in annotation.frame[['slice_id', 'participant_id']].drop_duplicates().itertuples(index=False)
                if sid in slice_members and pid not in slice_members[sid]
            )
            if bad:
                raise ValidationError(f"individual ratings for non-members: {bad}", bad)

    for category, ids in orphans.items():
        if ids:
            logger.warning("%s: %s", category.replace('_', ' '), ', '.join(ids))
    return orphans


# Writers (inverse of the loaders)

def write_accel(recordings: Iterable[AccelRecording], path) -> None:
    frames = [
        pd.DataFrame({'participant_id': r.participant_id, 't': r.t, 'ax': r.xyz[:, 0], 'ay': r.xyz[:, 1], 'az': r.xyz[:, 2]})
        for r in recordings
    ]
    pd.concat(frames, ignore_index=True).to_csv(path, index=False, lineterminator='\n')


def write_speaking(statuses: Iterable[SpeakingStatus], path) -> None:
    frames = [
        pd.DataFrame({'participant_id': s.participant_id, 't': np.arange(s.t0, s.t0 + len(s)), 'status': s.status})
        for s in statuses
    ]
    pd.concat(frames, ignore_index=True).to_csv(path, index=False, lineterminator='\n')


def write_groups(groups: Iterable[ConversationGroup], path) -> None:
    frame = pd.DataFrame(
        [(g.group_id, ';'.join(g.member_ids), g.start_t, g.end_t) for g in groups],
        columns=GROUP_COLUMNS,
    )
    frame.to_csv(path, index=False, lineterminator='\n')


def write_annotations(annotations: AnnotationSet, path) -> None:
    frame = annotations.frame
    if annotations.level == GROUP:
        frame = frame.drop(columns=['participant_id'])
    frame.to_csv(path, index=False, lineterminator='\n')
