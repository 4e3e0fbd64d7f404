"""Signal preprocessing and conversation feature extraction."""

from .preprocess import (
    CHANNELS,
    ChannelSet,
    WindowConfig,
    zscore,
    derive_channels,
    window_features,
    windowed_channels,
    prepare_channels,
)
from .coordination import CoordinationCalculator, CoordinationParams, PairFeatureSet, pair_features
from .turntaking import TurnSequence, segment_turns, equality, fluency, synchronization, turn_features
from .aggregate import AGGREGATORS, aggregate_values, aggregate_pairs, aggregate_turns, mode_value, select_columns
from .extractor import FeatureExtractor, FeatureTables

__all__ = [
    'CHANNELS',
    'ChannelSet',
    'WindowConfig',
    'zscore',
    'derive_channels',
    'window_features',
    'windowed_channels',
    'prepare_channels',
    'CoordinationCalculator',
    'CoordinationParams',
    'PairFeatureSet',
    'pair_features',
    'TurnSequence',
    'segment_turns',
    'equality',
    'fluency',
    'synchronization',
    'turn_features',
    'AGGREGATORS',
    'aggregate_values',
    'aggregate_pairs',
    'aggregate_turns',
    'mode_value',
    'select_columns',
    'FeatureExtractor',
    'FeatureTables',
]
