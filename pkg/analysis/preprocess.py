"""Accelerometer standardization, channel derivation and sliding-window features."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal, stats

from errors import DegenerateSignalError, InsufficientDataError
from ingest.models import AccelRecording

CHANNELS = ('raw_x', 'raw_y', 'raw_z', 'abs_x', 'abs_y', 'abs_z', 'euclid_norm')
WINDOW_STATISTICS = ('mean', 'variance', 'bands')


@dataclass(frozen=True)
class WindowConfig:
    """Sliding-window settings; hop defaults to 50% overlap."""

    window_len_s: float
    hop_s: Optional[float] = None
    statistics: Sequence[str] = WINDOW_STATISTICS
    n_bands: int = 4

    @property
    def effective_hop_s(self) -> float:
        return self.hop_s if self.hop_s else self.window_len_s / 2.0

    def hop_samples(self, rate_hz: float) -> int:
        return max(int(round(self.effective_hop_s * rate_hz)), 1)

    @property
    def label(self) -> str:
        return f"{self.window_len_s:g}s"


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Named real-valued channels of one participant, all of equal length."""

    participant_id: str
    rate_hz: float
    channels: Dict[str, np.ndarray] = field(repr=False)
    window_cfg: Optional[WindowConfig] = None

    def __post_init__(self):
        lengths = {name: len(values) for name, values in self.channels.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"{self.participant_id}: channels differ in length {lengths}")

    def __len__(self) -> int:
        return len(next(iter(self.channels.values()))) if self.channels else 0

    @property
    def names(self) -> List[str]:
        return list(self.channels)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.channels)

    def truncate(self, n: int) -> 'ChannelSet':
        return ChannelSet(self.participant_id, self.rate_hz, {k: v[:n] for k, v in self.channels.items()}, self.window_cfg)


def zscore(recording: AccelRecording) -> AccelRecording:
    """Standardize each axis to mean 0 and sample standard deviation 1."""
    xyz = recording.xyz
    if len(recording) < 2:
        raise DegenerateSignalError(f"{recording.participant_id}", 'need at least 2 samples to standardize')
    spread = xyz.std(axis=0, ddof=1)
    for axis, sd in zip('xyz', spread):
        if not sd > 0:
            raise DegenerateSignalError(f"{recording.participant_id}.{axis}")
    return recording.with_values(stats.zscore(xyz, axis=0, ddof=1))


def derive_channels(z: AccelRecording) -> ChannelSet:
    """Raw and absolute axes plus the Euclidean norm of the raw values."""
    xyz = z.xyz
    channels = {
        'raw_x': xyz[:, 0].copy(),
        'raw_y': xyz[:, 1].copy(),
        'raw_z': xyz[:, 2].copy(),
        'abs_x': np.abs(xyz[:, 0]),
        'abs_y': np.abs(xyz[:, 1]),
        'abs_z': np.abs(xyz[:, 2]),
        'euclid_norm': np.sqrt(np.sum(xyz ** 2, axis=1)),
    }
    return ChannelSet(z.participant_id, z.sample_rate_hz, channels)


def band_edges(window_samples: int, rate_hz: float, n_bands: int) -> np.ndarray:
    """Log-spaced band edges from the lowest non-DC bin to Nyquist."""
    lowest = rate_hz / window_samples
    return np.geomspace(lowest, rate_hz / 2.0, n_bands + 1)


def window_features(channel: np.ndarray, cfg: Optional[WindowConfig], rate_hz: float = 20.0) -> pd.DataFrame:
    """Sliding-window statistics of one channel.

    Args:
        channel: Real-valued series
        cfg: Window settings, or None to pass the channel through unchanged
        rate_hz: Sample rate of ``channel``

    Returns:
        DataFrame with one column per statistic ('raw' when ``cfg`` is None);
        band powers are named band_0..band_{B-1}
    """
    channel = np.asarray(channel, dtype=float)
    if cfg is None:
        return pd.DataFrame({'raw': channel})

    win = int(round(cfg.window_len_s * rate_hz))
    hop = cfg.hop_samples(rate_hz)
    if win < 2:
        raise InsufficientDataError(f"window of {cfg.window_len_s} s is shorter than 2 samples")
    if win > channel.size:
        raise InsufficientDataError(f"window of {win} samples is longer than the signal ({channel.size})")

    frames = sliding_window_view(channel, win)[::hop]
    out = {}
    if 'mean' in cfg.statistics:
        out['mean'] = frames.mean(axis=1)
    if 'variance' in cfg.statistics:
        out['variance'] = frames.var(axis=1)
    if 'bands' in cfg.statistics:
        taper = signal.get_window('hann', win)
        power = np.abs(np.fft.rfft(frames * taper, axis=1)) ** 2
        freqs = np.fft.rfftfreq(win, d=1.0 / rate_hz)
        edges = band_edges(win, rate_hz, cfg.n_bands)
        for k in range(cfg.n_bands):
            lo, hi = edges[k], edges[k + 1]
            in_band = (freqs > lo) & (freqs <= hi) if k else (freqs >= lo) & (freqs <= hi)
            out[f"band_{k}"] = power[:, in_band].sum(axis=1)
    return pd.DataFrame(out)


def windowed_channels(channels: ChannelSet, cfg: Optional[WindowConfig]) -> ChannelSet:
    """Apply ``window_features`` to every channel.

    Windowed channels are named ``<channel>.<statistic>`` and sampled at
    the rate implied by the hop rounded to whole samples.
    """
    if cfg is None:
        return channels
    derived = {}
    for name, values in channels.channels.items():
        table = window_features(values, cfg, channels.rate_hz)
        for stat in table.columns:
            derived[f"{name}.{stat}"] = table[stat].to_numpy()
    return ChannelSet(channels.participant_id, channels.rate_hz / cfg.hop_samples(channels.rate_hz), derived, cfg)


def prepare_channels(recording: AccelRecording, cfg: Optional[WindowConfig] = None) -> ChannelSet:
    """z-score, derive the 7 channels and optionally window them."""
    return windowed_channels(derive_channels(zscore(recording)), cfg)
