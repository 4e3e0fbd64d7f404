"""Thin-slicing of conversation groups."""

import logging
from typing import Dict, Iterable, List, Union

import numpy as np
import pandas as pd

from .models import ConversationGroup, ConversationSlice

logger = logging.getLogger(__name__)


def slice_conversations(
    groups: Iterable[Union[ConversationGroup, ConversationSlice]],
    slice_len_s: float = 60.0,
    min_dur_s: float = 30.0,
    rate_hz: float = 20.0,
) -> List[ConversationSlice]:
    """Split conversation groups into independent thin slices.

    Groups shorter than ``min_dur_s`` are dropped. Groups up to twice the
    slice length are kept whole. Longer groups are split into consecutive
    ``slice_len_s`` slices; a trailing remainder of at least ``min_dur_s``
    becomes a final shorter slice, a shorter one is merged into the last
    full slice.

    Args:
        groups: Conversation groups (or slices, which are passed through)
        slice_len_s: Slice length in seconds
        min_dur_s: Minimum kept duration in seconds
        rate_hz: Clock rate of the group time indices

    Returns:
        Slices in input order
    """
    if slice_len_s <= 0 or min_dur_s <= 0:
        raise ValueError("slice_len_s and min_dur_s must be greater than 0")
    if rate_hz <= 0:
        raise ValueError("rate_hz must be greater than 0")

    slice_len = int(round(slice_len_s * rate_hz))
    min_len = int(round(min_dur_s * rate_hz))

    slices = []
    for group in groups:
        length = group.end_t - group.start_t
        if length < min_len:
            logger.info(
                "Dropping %s: duration %.1f s below minimum %.1f s",
                getattr(group, 'slice_id', group.group_id), length / rate_hz, min_dur_s,
            )
            continue

        if length <= 2 * slice_len:
            bounds = [(group.start_t, group.end_t)]
        else:
            n_full = length // slice_len
            starts = group.start_t + slice_len * np.arange(n_full)
            bounds = [(int(s), int(s) + slice_len) for s in starts]
            remainder = length - n_full * slice_len
            if remainder >= min_len:
                bounds.append((bounds[-1][1], group.end_t))
            elif remainder > 0:
                bounds[-1] = (bounds[-1][0], group.end_t)

        whole = len(bounds) == 1
        for k, (start, end) in enumerate(bounds):
            if isinstance(group, ConversationSlice) and whole:
                slice_id = group.slice_id
            else:
                slice_id = f"{group.group_id}_{k}" if not isinstance(group, ConversationSlice) else f"{group.slice_id}_{k}"
            slices.append(ConversationSlice(
                slice_id=slice_id,
                group_id=group.group_id,
                member_ids=group.member_ids,
                start_t=start,
                end_t=end,
                duration_s=(end - start) / rate_hz,
            ))
    return slices


def dataset_summary(
    groups: List[ConversationGroup],
    slices: List[ConversationSlice],
    rate_hz: float = 20.0,
) -> Dict[str, object]:
    """Cardinality and duration statistics before and after slicing."""
    durations_min = pd.Series([g.duration_s(rate_hz) / 60.0 for g in groups], dtype=float)
    cardinality = pd.Series([s.cardinality for s in slices], dtype=int)
    kept_groups = {s.group_id for s in slices}
    return {
        'n_groups': len(groups),
        'n_groups_kept': len(kept_groups),
        'n_groups_dropped': len(groups) - len(kept_groups),
        'n_slices': len(slices),
        'duration_mean_min': float(durations_min.mean()) if len(groups) else float('nan'),
        'duration_std_min': float(durations_min.std()) if len(groups) > 1 else float('nan'),
        'duration_median_min': float(durations_min.median()) if len(groups) else float('nan'),
        'duration_mode_min': float(durations_min.round(2).mode().iloc[0]) if len(groups) else float('nan'),
        'cardinality_counts': {int(k): int(v) for k, v in cardinality.value_counts().sort_index().items()},
    }
