"""Slice-level feature extraction into group and individual feature matrices."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import pandas as pd
from joblib import Parallel, delayed

from config import get_settings
from errors import ConvQError
from ingest.models import AccelRecording, ConversationSlice, SpeakingStatus
from .aggregate import aggregate_pairs, aggregate_turns, member_turns
from .coordination import CoordinationParams, PairFeatureSet, pair_features
from .preprocess import ChannelSet, WindowConfig, derive_channels, windowed_channels, zscore
from .turntaking import turn_features

logger = logging.getLogger(__name__)

COORDINATION_SETS = ('sync', 'caus', 'conv')
_UNSET = object()


@dataclass
class FeatureTables:
    """Feature matrices of a set of slices.

    ``group`` is indexed by slice_id, ``individual`` by (slice_id,
    participant_id). Both carry group_id and cardinality columns ahead of
    the ``feature__channel__aggregator`` columns.
    """

    group: pd.DataFrame
    individual: pd.DataFrame
    turns: pd.DataFrame = field(default_factory=pd.DataFrame)

    @property
    def feature_columns(self) -> List[str]:
        return [c for c in self.group.columns if '__' in c]


class FeatureExtractor:
    """Extracts turn-taking and coordination features per conversation slice."""

    def __init__(
        self,
        settings=None,
        feature_sets: Optional[Sequence[str]] = None,
        window_cfg=_UNSET,
        include_raw: Optional[bool] = None,
        aggregators: Optional[Sequence[str]] = None,
    ):
        """Initialize feature extractor.

        Args:
            settings: Settings instance (default: cached settings)
            feature_sets: Feature sets to compute (default: settings.FEATURE_SETS)
            window_cfg: Sliding-window settings, None for raw channels only
            include_raw: Keep raw channels next to windowed ones
            aggregators: Aggregator names (default: settings.AGGREGATORS)
        """
        self.settings = settings or get_settings()
        s = self.settings
        self.feature_sets = list(feature_sets or s.FEATURE_SETS)
        if window_cfg is _UNSET:
            window_cfg = (
                WindowConfig(s.WINDOW_SIZE_S, s.WINDOW_HOP_S, tuple(s.WINDOW_STATISTICS), s.SPECTRAL_BANDS)
                if s.WINDOW_SIZE_S else None
            )
        self.window_cfg: Optional[WindowConfig] = window_cfg
        self.include_raw = s.INCLUDE_RAW_CHANNELS if include_raw is None else include_raw
        self.aggregators = list(aggregators or s.AGGREGATORS)

    @property
    def coordination_sets(self) -> List[str]:
        return [f for f in self.feature_sets if f in COORDINATION_SETS]

    def member_channels(self, recording: AccelRecording) -> List[ChannelSet]:
        """Channel sets to analyse for one member: raw and/or windowed."""
        raw = derive_channels(zscore(recording))
        if self.window_cfg is None:
            return [raw]
        windowed = windowed_channels(raw, self.window_cfg)
        return [raw, windowed] if self.include_raw else [windowed]

    def pairwise(self, slice_: ConversationSlice, accel: Mapping[str, AccelRecording]) -> List[PairFeatureSet]:
        """Coordination features for every pair and channel of a slice."""
        members = {}
        for pid in slice_.member_ids:
            recording = accel.get(pid)
            if recording is None:
                logger.warning("%s: no acceleration for %s", slice_.slice_id, pid)
                return []
            members[pid] = self.member_channels(recording.window(slice_.start_t, slice_.end_t))

        results = []
        for first, second in slice_.pairs():
            for a_set, b_set in zip(members[first], members[second]):
                n = min(len(a_set), len(b_set))
                params = CoordinationParams.from_settings(self.settings, a_set.rate_hz)
                for channel in a_set.names:
                    results.append(pair_features(
                        (first, second), channel,
                        a_set.channels[channel][:n], b_set.channels[channel][:n],
                        params, self.coordination_sets,
                    ))
        return results

    def turn_table(self, slice_: ConversationSlice, speaking: Mapping[str, SpeakingStatus]):
        """Per-member turn-taking features and the turn dump of a slice."""
        statuses = {}
        rate_hz = self.settings.SPEAKING_RATE_HZ
        for pid in slice_.member_ids:
            status = speaking.get(pid)
            if status is None:
                raise ConvQError(f"{slice_.slice_id}: no speaking status for {pid}")
            statuses[pid] = status.window(slice_.start_t, slice_.end_t).status
            rate_hz = status.rate_hz
        n = min(len(v) for v in statuses.values())
        statuses = {pid: v[:n] for pid, v in statuses.items()}
        s = self.settings
        features, dump = turn_features(
            statuses, rate_hz, s.GAP_THRESHOLD_MS, s.BACKCHANNEL_MAX_S, s.LITERAL_OVERLAP,
        )
        if not dump.empty:
            dump.insert(0, 'slice_id', slice_.slice_id)
        return features, dump

    def extract_slice(
        self,
        slice_: ConversationSlice,
        accel: Mapping[str, AccelRecording],
        speaking: Mapping[str, SpeakingStatus],
    ) -> Tuple[Dict[str, object], List[Dict[str, object]], pd.DataFrame]:
        """Group row, individual rows and turn dump of one slice.

        Features that fail for this slice are left out and end up NaN in
        the assembled matrix.
        """
        base = {'slice_id': slice_.slice_id, 'group_id': slice_.group_id, 'cardinality': slice_.cardinality}
        group_row = dict(base)
        individual_rows = [dict(base, participant_id=pid) for pid in slice_.member_ids]
        dump = pd.DataFrame()

        if 'tt' in self.feature_sets:
            try:
                turns, dump = self.turn_table(slice_, speaking)
                group_row.update(aggregate_turns(turns, self.aggregators))
                for row in individual_rows:
                    row.update(member_turns(turns, row['participant_id']))
            except ConvQError as e:
                logger.warning("%s: turn-taking features unavailable (%s)", slice_.slice_id, e)

        if self.coordination_sets:
            try:
                pairs = self.pairwise(slice_, accel)
                if pairs:
                    group_row.update(aggregate_pairs(pairs, slice_.member_ids, None, self.aggregators))
                    for row in individual_rows:
                        row.update(aggregate_pairs(pairs, slice_.member_ids, row['participant_id'], self.aggregators))
            except ConvQError as e:
                logger.warning("%s: coordination features unavailable (%s)", slice_.slice_id, e)

        return group_row, individual_rows, dump

    def extract(
        self,
        slices: Iterable[ConversationSlice],
        accel: Mapping[str, AccelRecording],
        speaking: Mapping[str, SpeakingStatus],
        workers: Optional[int] = None,
    ) -> FeatureTables:
        """Extract features for every slice.

        Args:
            slices: Conversation slices
            accel: Acceleration per participant
            speaking: Speaking status per participant
            workers: Parallel workers (default: settings.WORKERS)

        Returns:
            FeatureTables with one row per slice and per slice member
        """
        slices = list(slices)
        workers = workers or self.settings.WORKERS
        logger.info("Extracting %s features for %d slices (window %s, %d workers)",
                    '+'.join(self.feature_sets), len(slices),
                    self.window_cfg.label if self.window_cfg else 'none', workers)

        if workers > 1:
            results = Parallel(n_jobs=workers)(
                delayed(self.extract_slice)(s, accel, speaking) for s in slices
            )
        else:
            results = [self.extract_slice(s, accel, speaking) for s in slices]

        group = pd.DataFrame([r[0] for r in results])
        individual = pd.DataFrame([row for r in results for row in r[1]])
        dumps = [r[2] for r in results if not r[2].empty]
        turns = pd.concat(dumps, ignore_index=True) if dumps else pd.DataFrame()

        if not group.empty:
            group = group.set_index('slice_id')
            individual = individual.set_index(['slice_id', 'participant_id'])
        return FeatureTables(group=group, individual=individual, turns=turns)
