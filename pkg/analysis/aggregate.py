"""Reduce pairwise and per-member features to group and individual feature vectors."""

from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from errors import ValidationError
from .coordination import FEATURES_BY_SET, ORDERED_FEATURES, PairFeatureSet
from .turntaking import TT_FEATURES

AGGREGATORS = ('min', 'max', 'mean', 'mode', 'median', 'variance')
MODE_BINS = 10
TT_CHANNEL = 'speech'


def feature_set_of(feature: str) -> Optional[str]:
    """Feature set (tt, sync, caus, conv) a feature name belongs to."""
    if feature in TT_FEATURES or feature == 'abs_eq':
        return 'tt'
    for name, features in FEATURES_BY_SET.items():
        if feature in features:
            return name
    return None


def column_name(feature: str, channel: str, aggregator: Optional[str] = None) -> str:
    """Feature-matrix column name ``feature__channel__aggregator``."""
    parts = [feature, channel] + ([aggregator] if aggregator else [])
    return '__'.join(parts)


def mode_value(values) -> float:
    """Midpoint of the densest of 10 equal-width bins over the value range.

    A single distinct value is its own mode; the first bin wins ties.
    """
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    if values.size == 0:
        return float('nan')
    lo, hi = values.min(), values.max()
    if lo == hi:
        return float(lo)
    counts, edges = np.histogram(values, bins=MODE_BINS, range=(lo, hi))
    k = int(np.argmax(counts))
    return float((edges[k] + edges[k + 1]) / 2.0)


def aggregate_values(values, aggregators: Sequence[str] = AGGREGATORS) -> Dict[str, float]:
    """Apply each aggregator to a set of values, ignoring NaN.

    Variance is the population variance.
    """
    series = pd.Series(values, dtype=float)
    if series.empty:
        raise ValidationError('cannot aggregate an empty set of values')
    finite = series.dropna()
    functions = {
        'min': lambda: finite.min(),
        'max': lambda: finite.max(),
        'mean': lambda: finite.mean(),
        'median': lambda: finite.median(),
        'variance': lambda: finite.var(ddof=0),
        'mode': lambda: mode_value(finite),
    }
    result = {}
    for name in aggregators:
        if name not in functions:
            raise ValueError(f"unknown aggregator '{name}'")
        result[name] = float(functions[name]()) if len(finite) else float('nan')
    return result


def _index_pairs(pair_features: Iterable[PairFeatureSet]) -> Dict[tuple, Dict[str, PairFeatureSet]]:
    indexed: Dict[tuple, Dict[str, PairFeatureSet]] = {}
    for pf in pair_features:
        indexed.setdefault(tuple(pf.pair), {})[pf.channel] = pf
    return indexed


def _oriented(indexed, first: str, second: str) -> Dict[str, PairFeatureSet]:
    """Channel features of the pair seen from ``first``."""
    if (first, second) in indexed:
        return indexed[(first, second)]
    if (second, first) in indexed:
        return {ch: pf.swapped() for ch, pf in indexed[(second, first)].items()}
    raise KeyError((first, second))


def aggregate_pairs(
    pair_features: Iterable[PairFeatureSet],
    members: Sequence[str],
    participant: Optional[str] = None,
    aggregators: Sequence[str] = AGGREGATORS,
) -> Dict[str, float]:
    """Aggregate pairwise features at group or individual scope.

    Group scope (``participant`` None) needs every unordered pair of
    ``members``; ordered features contribute both directions of each pair.
    Individual scope uses exactly the pairs containing ``participant``, each
    seen from the participant.

    Args:
        pair_features: Pairwise features, one entry per pair and channel
        members: Members of the slice
        participant: Member for individual scope, or None for group scope
        aggregators: Aggregator names

    Returns:
        Mapping of ``feature__channel__aggregator`` to value
    """
    members = sorted(members)
    indexed = _index_pairs(pair_features)
    if not indexed:
        raise ValidationError('no pairwise features to aggregate')

    if participant is None:
        wanted = list(combinations(members, 2))
    else:
        if participant not in members:
            raise ValidationError(f"{participant} is not a member", [participant])
        wanted = [(participant, other) for other in members if other != participant]

    views: List[Dict[str, PairFeatureSet]] = []
    missing = []
    for first, second in wanted:
        try:
            views.append(_oriented(indexed, first, second))
        except KeyError:
            missing.append(f"{first}/{second}")
    if missing:
        raise ValidationError(f"missing pairwise features for {', '.join(missing)}", missing)

    reverse_views = []
    if participant is None:
        reverse_views = [_oriented(indexed, second, first) for first, second in wanted]

    samples: Dict[tuple, List[float]] = {}
    for view in views:
        for channel, pf in view.items():
            for feature, value in pf.values.items():
                samples.setdefault((feature, channel), []).append(value)
    for view in reverse_views:
        for channel, pf in view.items():
            for feature, value in pf.values.items():
                if feature in ORDERED_FEATURES:
                    samples[(feature, channel)].append(value)

    out = {}
    for (feature, channel), values in samples.items():
        for agg, value in aggregate_values(values, aggregators).items():
            out[column_name(feature, channel, agg)] = value
    return out


def aggregate_turns(
    turn_features: pd.DataFrame,
    aggregators: Sequence[str] = AGGREGATORS,
) -> Dict[str, float]:
    """Group-scope aggregation of per-member turn-taking features.

    ``eq`` is aggregated both as is and as ``abs_eq``.
    """
    if turn_features.empty:
        raise ValidationError('no turn-taking features to aggregate')
    table = turn_features.copy()
    if 'eq' in table:
        table['abs_eq'] = table['eq'].abs()
    out = {}
    for feature in table.columns:
        for agg, value in aggregate_values(table[feature].to_numpy(), aggregators).items():
            out[column_name(feature, TT_CHANNEL, agg)] = value
    return out


def member_turns(turn_features: pd.DataFrame, participant: str) -> Dict[str, float]:
    """A member's own turn-taking values, unaggregated."""
    row = turn_features.loc[participant]
    return {column_name(feature, TT_CHANNEL): float(value) for feature, value in row.items()}


def select_columns(
    frame: pd.DataFrame,
    feature_sets: Optional[Iterable[str]] = None,
    aggregators: Optional[Iterable[str]] = None,
) -> List[str]:
    """Feature columns of ``frame`` restricted to feature sets and aggregators.

    Unaggregated columns (own turn-taking values) are kept regardless of
    ``aggregators``.
    """
    sets = set(feature_sets) if feature_sets is not None else None
    aggs = set(aggregators) if aggregators is not None else None
    columns = []
    for col in frame.columns:
        parts = col.split('__')
        if len(parts) < 2:
            continue
        fset = feature_set_of(parts[0])
        if fset is None or (sets is not None and fset not in sets):
            continue
        if aggs is not None and len(parts) == 3 and parts[2] not in aggs:
            continue
        columns.append(col)
    return columns
