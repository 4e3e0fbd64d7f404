"""Pairwise bodily-coordination features: synchrony, causality and convergence."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import signal
from sklearn.metrics import mutual_info_score
from statsmodels.regression.linear_model import OLS
from statsmodels.tools.tools import add_constant

from errors import (
    ConvQError,
    InsufficientDataError,
    RankDeficiencyError,
    UndefinedStatisticError,
)

logger = logging.getLogger(__name__)

SYNC_FEATURES = (
    'corr',
    'lagcorr_min', 'lagcorr_max', 'lagcorr_argmin', 'lagcorr_argmax',
    'mi_min', 'mi_max', 'mi_mean', 'mi_variance',
    'mimicry_lag_min', 'mimicry_lag_max', 'mimicry_lag_mean', 'mimicry_lag_variance',
    'mimicry_lead_min', 'mimicry_lead_max', 'mimicry_lead_mean', 'mimicry_lead_variance',
)
CAUS_FEATURES = ('coherence_min', 'coherence_max', 'granger_f_out', 'granger_f_in')
CONV_FEATURES = ('symconv_rho', 'asymconv_lag', 'asymconv_lead', 'globconv_d1_minus_d2')

FEATURES_BY_SET = {
    'sync': SYNC_FEATURES,
    'caus': CAUS_FEATURES,
    'conv': CONV_FEATURES,
}

# Features whose value depends on which member of the pair is "self".
_SWAP_PAIRS = (
    ('granger_f_out', 'granger_f_in'),
    ('asymconv_lag', 'asymconv_lead'),
) + tuple(
    (f"mimicry_lag_{s}", f"mimicry_lead_{s}") for s in ('min', 'max', 'mean', 'variance')
)
_NEGATE_ON_SWAP = ('lagcorr_argmin', 'lagcorr_argmax')
ORDERED_FEATURES = frozenset(_NEGATE_ON_SWAP) | frozenset(n for pair in _SWAP_PAIRS for n in pair)


@dataclass(frozen=True)
class CoordinationParams:
    """Coordination parameters in samples of the analysed series."""

    max_lag: int = 60
    mi_bins: int = 8
    mi_window: int = 200
    mimicry_window: int = 100
    granger_order: int = 2
    coherence_segment: int = 80

    @classmethod
    def from_seconds(
        cls,
        rate_hz: float,
        max_lag_s: float = 3.0,
        mi_bins: int = 8,
        mi_window_s: float = 10.0,
        mimicry_window_s: float = 5.0,
        granger_order: int = 2,
        coherence_segment_s: float = 4.0,
    ) -> 'CoordinationParams':
        def samples(seconds: float, floor: int) -> int:
            return max(int(round(seconds * rate_hz)), floor)

        return cls(
            max_lag=samples(max_lag_s, 1),
            mi_bins=mi_bins,
            mi_window=samples(mi_window_s, 4),
            mimicry_window=samples(mimicry_window_s, 3),
            granger_order=granger_order,
            coherence_segment=samples(coherence_segment_s, 4),
        )

    @classmethod
    def from_settings(cls, settings, rate_hz: float) -> 'CoordinationParams':
        return cls.from_seconds(
            rate_hz,
            max_lag_s=settings.MAX_LAG_S,
            mi_bins=settings.MI_BINS,
            mi_window_s=settings.MI_WINDOW_S,
            mimicry_window_s=settings.MIMICRY_WINDOW_S,
            granger_order=settings.GRANGER_ORDER,
            coherence_segment_s=settings.COHERENCE_SEGMENT_S,
        )


@dataclass(frozen=True)
class PairFeatureSet:
    """All coordination features of one pair on one channel, from the first member's view."""

    pair: Tuple[str, str]
    channel: str
    values: Dict[str, float] = field(default_factory=dict)

    def swapped(self) -> 'PairFeatureSet':
        """Same features seen from the second member of the pair."""
        values = dict(self.values)
        for left, right in _SWAP_PAIRS:
            if left in values or right in values:
                values[left], values[right] = self.values.get(right, np.nan), self.values.get(left, np.nan)
        for name in _NEGATE_ON_SWAP:
            if name in values:
                values[name] = -values[name]
        return PairFeatureSet((self.pair[1], self.pair[0]), self.channel, values)


def _check_pair(a, b, min_len: int) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"series must be 1-D and of equal length, got {a.shape} and {b.shape}")
    if a.size < min_len:
        raise InsufficientDataError(f"need at least {min_len} samples, got {a.size}")
    return a, b


def _summary(values: List[float]) -> Dict[str, float]:
    values = np.asarray(values, dtype=float)
    return {
        'min': float(values.min()),
        'max': float(values.max()),
        'mean': float(values.mean()),
        'variance': float(values.var()),
    }


class CoordinationCalculator:
    """Calculate pairwise coordination features from two aligned series."""

    @staticmethod
    def pearson(a, b) -> float:
        """Pearson correlation coefficient."""
        a, b = _check_pair(a, b, 3)
        da = a - a.mean()
        db = b - b.mean()
        denom = np.sqrt(np.dot(da, da) * np.dot(db, db))
        if not denom > 0:
            raise UndefinedStatisticError('correlation undefined for a constant series')
        return float(np.clip(np.dot(da, db) / denom, -1.0, 1.0))

    @staticmethod
    def lagged_correlation(a, b, max_lag: int) -> Dict[str, float]:
        """Correlation of a_t with b_{t+lag} for lag in [-max_lag, max_lag].

        Ties in argmin/argmax go to the smaller |lag| (negative first).
        """
        a, b = _check_pair(a, b, 2 * max_lag + 3)
        n = a.size
        best_max = (-np.inf, 0)
        best_min = (np.inf, 0)
        found = False
        for lag in sorted(range(-max_lag, max_lag + 1), key=lambda l: (abs(l), l)):
            if lag >= 0:
                x, y = a[:n - lag], b[lag:]
            else:
                x, y = a[-lag:], b[:n + lag]
            try:
                r = CoordinationCalculator.pearson(x, y)
            except UndefinedStatisticError:
                continue
            found = True
            if r > best_max[0]:
                best_max = (r, lag)
            if r < best_min[0]:
                best_min = (r, lag)
        if not found:
            raise UndefinedStatisticError('lagged correlation undefined at every lag')
        return {
            'min': best_min[0],
            'max': best_max[0],
            'argmin': float(best_min[1]),
            'argmax': float(best_max[1]),
        }

    @staticmethod
    def window_mutual_information(a, b, bins: int = 8) -> float:
        """Histogram mutual information (nats) with equal-width bins over each series' range."""
        joint, _, _ = np.histogram2d(a, b, bins=bins)
        return float(mutual_info_score(None, None, contingency=joint))

    @staticmethod
    def mutual_information(a, b, bins: int = 8, window: int = 200) -> Dict[str, float]:
        """Statistics of per-window mutual information over non-overlapping windows."""
        a, b = _check_pair(a, b, 1)
        n_windows = a.size // window
        if n_windows < 2:
            raise InsufficientDataError(f"need 2 windows of {window} samples, got {a.size} samples")
        values = [
            CoordinationCalculator.window_mutual_information(
                a[w * window:(w + 1) * window], b[w * window:(w + 1) * window], bins
            )
            for w in range(n_windows)
        ]
        return _summary(values)

    @staticmethod
    def _mimicry_scores(follower: np.ndarray, model: np.ndarray, window: int) -> List[float]:
        n_windows = follower.size // window
        scores = []
        for w in range(n_windows - 1):
            later = follower[(w + 1) * window:(w + 2) * window]
            earlier = model[w * window:(w + 1) * window]
            try:
                scores.append(CoordinationCalculator.pearson(later, earlier))
            except UndefinedStatisticError:
                logger.debug("mimicry window %d skipped: constant signal", w)
        return scores

    @staticmethod
    def mimicry(a, b, window: int = 100) -> Dict[str, float]:
        """Next-window cross-correlation in both directions.

        ``lag_*`` scores correlate a's window w+1 with b's window w (a follows b);
        ``lead_*`` scores are the same with roles swapped.
        """
        a, b = _check_pair(a, b, 1)
        if a.size // window < 3:
            raise InsufficientDataError(f"need 3 windows of {window} samples, got {a.size} samples")
        result = {}
        for direction, (follower, model) in (('lag', (a, b)), ('lead', (b, a))):
            scores = CoordinationCalculator._mimicry_scores(follower, model, window)
            if not scores:
                raise UndefinedStatisticError(f"mimicry ({direction}): every window was constant")
            for stat, value in _summary(scores).items():
                result[f"{direction}_{stat}"] = value
        return result

    @staticmethod
    def coherence(a, b, segment: int = 80) -> Dict[str, float]:
        """Min and max magnitude-squared coherence over non-DC frequency bins."""
        a, b = _check_pair(a, b, 1)
        if a.size < 2 * segment:
            raise InsufficientDataError(f"need {2 * segment} samples for segments of {segment}")
        kwargs = dict(fs=1.0, window='hann', nperseg=segment, noverlap=segment // 2)
        freqs, paa = signal.welch(a, **kwargs)
        _, pbb = signal.welch(b, **kwargs)
        _, pab = signal.csd(a, b, **kwargs)
        floor = 1e-20 * max(paa.max(), pbb.max(), 1e-300)
        keep = (freqs > 0) & (paa > floor) & (pbb > floor)
        if not keep.any():
            raise UndefinedStatisticError('coherence undefined: no frequency bin with power in both signals')
        dropped = int(((freqs > 0) & ~keep).sum())
        if dropped:
            logger.debug("coherence: %d zero-power bins excluded", dropped)
        coh = np.abs(pab[keep]) ** 2 / (paa[keep] * pbb[keep])
        coh = np.clip(coh, 0.0, 1.0)
        return {'min': float(coh.min()), 'max': float(coh.max())}

    @staticmethod
    def granger(a, b, order: int = 2) -> float:
        """F statistic for "a Granger-causes b" from nested least-squares AR fits of b."""
        a, b = _check_pair(a, b, 3 * order + 11)
        n = a.size
        y = b[order:]
        own = np.column_stack([b[order - k:n - k] for k in range(1, order + 1)])
        other = np.column_stack([a[order - k:n - k] for k in range(1, order + 1)])
        restricted = add_constant(own, prepend=False, has_constant='add')
        unrestricted = add_constant(np.column_stack([own, other]), prepend=False, has_constant='add')
        if np.linalg.matrix_rank(unrestricted) < unrestricted.shape[1]:
            raise RankDeficiencyError('granger: lagged design matrix is singular')

        rss_r = OLS(y, restricted).fit().ssr
        rss_u = OLS(y, unrestricted).fit().ssr
        dof = y.size - 2 * order - 1
        if not rss_u > 1e-12 * max(rss_r, 1e-300):
            raise UndefinedStatisticError('granger: unrestricted model fits exactly')
        f_value = ((rss_r - rss_u) / order) / (rss_u / dof)
        return float(max(f_value, 0.0))

    @staticmethod
    def symmetric_convergence(a, b) -> float:
        """Correlation between time and |a - b|; negative means converging."""
        a, b = _check_pair(a, b, 3)
        t = np.arange(a.size, dtype=float)
        return CoordinationCalculator.pearson(t, np.abs(a - b))

    @staticmethod
    def asymmetric_convergence(a, b) -> Dict[str, float]:
        """Approach of each member towards the partner's first-half baseline.

        ``lag`` tracks |a_t - mean(b first half)|, ``lead`` the reverse. A
        direction with constant distance is NaN; both undefined is an error.
        """
        a, b = _check_pair(a, b, 4)
        half = a.size // 2
        t = np.arange(a.size, dtype=float)
        result = {}
        for name, (self_, partner) in (('lag', (a, b)), ('lead', (b, a))):
            try:
                result[name] = CoordinationCalculator.pearson(t, np.abs(self_ - partner[:half].mean()))
            except UndefinedStatisticError:
                result[name] = float('nan')
        if np.isnan(result['lag']) and np.isnan(result['lead']):
            raise UndefinedStatisticError('asymmetric convergence undefined in both directions')
        return result

    @staticmethod
    def global_convergence(a, b) -> float:
        """Mean |a - b| over the first half minus over the second half."""
        a, b = _check_pair(a, b, 4)
        half = a.size // 2
        diff = np.abs(a - b)
        return float(diff[:half].mean() - diff[-half:].mean())


def pair_features(
    pair: Tuple[str, str],
    channel: str,
    a: np.ndarray,
    b: np.ndarray,
    params: CoordinationParams,
    feature_sets: Iterable[str] = ('sync', 'caus', 'conv'),
) -> PairFeatureSet:
    """Compute every requested coordination feature for one pair and channel.

    Features that cannot be computed on this input are recorded as NaN.
    """
    calc = CoordinationCalculator
    feature_sets = set(feature_sets)
    values: Dict[str, float] = {}

    def attempt(names, compute):
        try:
            result = compute()
        except ConvQError as e:
            logger.debug("%s %s/%s: %s unavailable (%s)", channel, pair[0], pair[1], names[0], e)
            result = [np.nan] * len(names)
        for name, value in zip(names, result):
            values[name] = float(value)

    if 'sync' in feature_sets:
        attempt(('corr',), lambda: [calc.pearson(a, b)])
        attempt(SYNC_FEATURES[1:5], lambda: list(calc.lagged_correlation(a, b, params.max_lag).values()))
        attempt(SYNC_FEATURES[5:9], lambda: list(calc.mutual_information(a, b, params.mi_bins, params.mi_window).values()))
        attempt(SYNC_FEATURES[9:], lambda: list(calc.mimicry(a, b, params.mimicry_window).values()))
    if 'caus' in feature_sets:
        attempt(CAUS_FEATURES[:2], lambda: list(calc.coherence(a, b, params.coherence_segment).values()))
        attempt(('granger_f_out',), lambda: [calc.granger(a, b, params.granger_order)])
        attempt(('granger_f_in',), lambda: [calc.granger(b, a, params.granger_order)])
    if 'conv' in feature_sets:
        attempt(('symconv_rho',), lambda: [calc.symmetric_convergence(a, b)])
        attempt(('asymconv_lag', 'asymconv_lead'), lambda: list(calc.asymmetric_convergence(a, b).values()))
        attempt(('globconv_d1_minus_d2',), lambda: [calc.global_convergence(a, b)])
    return PairFeatureSet(pair, channel, values)
