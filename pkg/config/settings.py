"""Configuration settings management."""

import hashlib
import os
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Mapping, Optional

from dotenv import dotenv_values, load_dotenv

from errors import ConfigError

# Load environment variables from .env file
load_dotenv()

ENV_PREFIX = 'CONVQ_'

FEATURE_SETS = ('tt', 'sync', 'caus', 'conv')
AGGREGATORS = ('min', 'max', 'mean', 'mode', 'median', 'variance')
STUDIES = ('window', 'fusion', 'aggregator')

DEFAULTS: Dict[str, str] = {
    # Inputs
    'ACCEL_PATH': '',
    'SPEAKING_PATH': '',
    'GROUPS_PATH': '',
    'GROUP_ANNOTATIONS_PATH': '',
    'INDIVIDUAL_ANNOTATIONS_PATH': '',
    # Sampling (never stated for the source recordings, so configurable)
    'ACCEL_RATE_HZ': '20',
    'SPEAKING_RATE_HZ': '20',
    'CLOCK_RATE_HZ': '20',
    # Thin slicing
    'SLICE_LEN_S': '60',
    'MIN_DUR_S': '30',
    # Sliding windows ('none' = raw channels only)
    'WINDOW_SIZE_S': 'none',
    'WINDOW_HOP_S': '',
    'WINDOW_STATISTICS': 'mean,variance,bands',
    'SPECTRAL_BANDS': '4',
    'INCLUDE_RAW_CHANNELS': 'true',
    # Coordination features
    'MAX_LAG_S': '3',
    'MI_BINS': '8',
    'MI_WINDOW_S': '10',
    'MIMICRY_WINDOW_S': '5',
    'GRANGER_ORDER': '2',
    'COHERENCE_SEGMENT_S': '4',
    # Turn-taking
    'GAP_THRESHOLD_MS': '500',
    'BACKCHANNEL_MAX_S': '2',
    'LITERAL_OVERLAP': 'false',
    # Feature selection and aggregation
    'FEATURE_SETS': ','.join(FEATURE_SETS),
    'AGGREGATORS': ','.join(AGGREGATORS),
    # Reliability
    'KAPPA_THRESHOLD': '0.2',
    'BINARIZE_THRESHOLD': '3.0',
    # Hypothesis tests
    'QUANTILE': '0.5',
    'BOOTSTRAP_RESAMPLES': '1000',
    'LASSO_ALPHAS': '0.001,0.003,0.01,0.03,0.1,0.3,1.0',
    'SIGNIFICANCE': '0.005',
    'BONFERRONI_TESTS': '18',
    # Classification
    'CV_FOLDS': '5',
    'ELASTIC_L1_RATIO': '0.5',
    'ELASTIC_LAMBDAS': '0.01,0.1,1.0',
    'PCA_VARIANCE': '0.95',
    'SMOTE_K': '5',
    'STUDIES': ','.join(STUDIES),
    'STUDY_WINDOW_SIZES_S': 'none,1,3,5,10',
    # Run
    'SEED': '42',
    'WORKERS': '1',
    'OUTPUT_DIR': './output',
}

PATH_KEYS = (
    'ACCEL_PATH',
    'SPEAKING_PATH',
    'GROUPS_PATH',
    'GROUP_ANNOTATIONS_PATH',
    'INDIVIDUAL_ANNOTATIONS_PATH',
)


def parse_window(value: str, key: str) -> Optional[float]:
    value = value.strip().lower()
    if value in ('', 'none', '0'):
        return None
    try:
        size = float(value)
    except ValueError:
        raise ConfigError(key, f"expected seconds or 'none', got {value!r}")
    if size <= 0:
        raise ConfigError(key, 'window size must be positive')
    return size


class Settings:
    """Pipeline settings loaded from a config file and environment variables.

    Precedence (highest first): explicit overrides, ``CONVQ_*`` environment
    variables, the config file, built-in defaults.
    """

    def __init__(
        self,
        values: Optional[Mapping[str, Optional[str]]] = None,
        base_dir: Optional[Path] = None,
        overrides: Optional[Mapping[str, object]] = None,
    ):
        merged = dict(DEFAULTS)
        for key, value in (values or {}).items():
            if value is not None:
                merged[key.upper()] = str(value)
        for key in DEFAULTS:
            env_value = os.getenv(ENV_PREFIX + key)
            if env_value is not None:
                merged[key] = env_value
        for key, value in (overrides or {}).items():
            if value is not None:
                merged[key.upper()] = str(value)

        unknown = sorted(set(merged) - set(DEFAULTS))
        if unknown:
            raise ConfigError(unknown[0], 'unknown configuration key')

        self._raw = merged
        self.base_dir = Path(base_dir) if base_dir else Path.cwd()

        # Inputs
        self.ACCEL_PATH: Optional[Path] = self._path('ACCEL_PATH')
        self.SPEAKING_PATH: Optional[Path] = self._path('SPEAKING_PATH')
        self.GROUPS_PATH: Optional[Path] = self._path('GROUPS_PATH')
        self.GROUP_ANNOTATIONS_PATH: Optional[Path] = self._path('GROUP_ANNOTATIONS_PATH')
        self.INDIVIDUAL_ANNOTATIONS_PATH: Optional[Path] = self._path('INDIVIDUAL_ANNOTATIONS_PATH')

        self.ACCEL_RATE_HZ: float = self._float('ACCEL_RATE_HZ')
        self.SPEAKING_RATE_HZ: float = self._float('SPEAKING_RATE_HZ')
        self.CLOCK_RATE_HZ: float = self._float('CLOCK_RATE_HZ')

        self.SLICE_LEN_S: float = self._float('SLICE_LEN_S')
        self.MIN_DUR_S: float = self._float('MIN_DUR_S')

        self.WINDOW_SIZE_S: Optional[float] = parse_window(merged['WINDOW_SIZE_S'], 'WINDOW_SIZE_S')
        self.WINDOW_HOP_S: Optional[float] = self._optional_float('WINDOW_HOP_S')
        self.WINDOW_STATISTICS: List[str] = self._list('WINDOW_STATISTICS')
        self.SPECTRAL_BANDS: int = self._int('SPECTRAL_BANDS')
        self.INCLUDE_RAW_CHANNELS: bool = self._bool('INCLUDE_RAW_CHANNELS')

        self.MAX_LAG_S: float = self._float('MAX_LAG_S')
        self.MI_BINS: int = self._int('MI_BINS')
        self.MI_WINDOW_S: float = self._float('MI_WINDOW_S')
        self.MIMICRY_WINDOW_S: float = self._float('MIMICRY_WINDOW_S')
        self.GRANGER_ORDER: int = self._int('GRANGER_ORDER')
        self.COHERENCE_SEGMENT_S: float = self._float('COHERENCE_SEGMENT_S')

        self.GAP_THRESHOLD_MS: float = self._float('GAP_THRESHOLD_MS')
        self.BACKCHANNEL_MAX_S: float = self._float('BACKCHANNEL_MAX_S')
        self.LITERAL_OVERLAP: bool = self._bool('LITERAL_OVERLAP')

        self.FEATURE_SETS: List[str] = self._list('FEATURE_SETS')
        self.AGGREGATORS: List[str] = self._list('AGGREGATORS')

        self.KAPPA_THRESHOLD: float = self._float('KAPPA_THRESHOLD')
        self.BINARIZE_THRESHOLD: float = self._float('BINARIZE_THRESHOLD')

        self.QUANTILE: float = self._float('QUANTILE')
        self.BOOTSTRAP_RESAMPLES: int = self._int('BOOTSTRAP_RESAMPLES')
        self.LASSO_ALPHAS: List[float] = [float(v) for v in self._list('LASSO_ALPHAS')]
        self.SIGNIFICANCE: float = self._float('SIGNIFICANCE')
        self.BONFERRONI_TESTS: int = self._int('BONFERRONI_TESTS')

        self.CV_FOLDS: int = self._int('CV_FOLDS')
        self.ELASTIC_L1_RATIO: float = self._float('ELASTIC_L1_RATIO')
        self.ELASTIC_LAMBDAS: List[float] = [float(v) for v in self._list('ELASTIC_LAMBDAS')]
        self.PCA_VARIANCE: float = self._float('PCA_VARIANCE')
        self.SMOTE_K: int = self._int('SMOTE_K')
        self.STUDIES: List[str] = self._list('STUDIES')
        self.STUDY_WINDOW_SIZES_S: List[Optional[float]] = [
            parse_window(v, 'STUDY_WINDOW_SIZES_S') for v in self._list('STUDY_WINDOW_SIZES_S')
        ]

        self.SEED: int = self._int('SEED')
        self.WORKERS: int = self._int('WORKERS')
        self.OUTPUT_DIR: Path = self._path('OUTPUT_DIR') or self.base_dir / 'output'

    # Parsing helpers

    def _text(self, key: str) -> str:
        return self._raw[key].strip()

    def _int(self, key: str) -> int:
        try:
            return int(self._text(key))
        except ValueError:
            raise ConfigError(key, f"expected an integer, got {self._raw[key]!r}")

    def _float(self, key: str) -> float:
        try:
            return float(self._text(key))
        except ValueError:
            raise ConfigError(key, f"expected a number, got {self._raw[key]!r}")

    def _optional_float(self, key: str) -> Optional[float]:
        return self._float(key) if self._text(key) else None

    def _bool(self, key: str) -> bool:
        return self._text(key).lower() in ('1', 'true', 'yes', 'on')

    def _list(self, key: str) -> List[str]:
        return [part.strip() for part in self._raw[key].split(',') if part.strip()]

    def _path(self, key: str) -> Optional[Path]:
        text = self._text(key)
        if not text:
            return None
        path = Path(text).expanduser()
        return path if path.is_absolute() else (self.base_dir / path)

    # Derived values

    def samples(self, seconds: float) -> int:
        """Convert a duration in seconds to samples on the common clock."""
        return int(round(seconds * self.CLOCK_RATE_HZ))

    @property
    def window_hop_s(self) -> Optional[float]:
        """Hop between windows, defaulting to 50% overlap."""
        if self.WINDOW_SIZE_S is None:
            return None
        return self.WINDOW_HOP_S if self.WINDOW_HOP_S else self.WINDOW_SIZE_S / 2.0

    def as_dict(self) -> Dict[str, str]:
        """Canonical string view of every setting."""
        return {key: self._raw[key] for key in sorted(self._raw)}

    def config_hash(self) -> str:
        """Short SHA-256 over the canonical settings listing."""
        canonical = '\n'.join(f"{k}={v.strip()}" for k, v in self.as_dict().items() if k != 'WORKERS')
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]

    def replace(self, **overrides) -> 'Settings':
        """Copy with some keys replaced."""
        values = dict(self._raw)
        for key, value in overrides.items():
            values[key.upper()] = str(value)
        return Settings(values, base_dir=self.base_dir)

    def validate(self) -> None:
        """Validate value ranges and enumerations."""
        for key in ('ACCEL_RATE_HZ', 'SPEAKING_RATE_HZ', 'CLOCK_RATE_HZ', 'SLICE_LEN_S', 'MIN_DUR_S',
                    'MAX_LAG_S', 'MI_WINDOW_S', 'MIMICRY_WINDOW_S', 'COHERENCE_SEGMENT_S',
                    'GAP_THRESHOLD_MS', 'BACKCHANNEL_MAX_S'):
            if getattr(self, key) <= 0:
                raise ConfigError(key, 'must be greater than 0')
        for key in ('MI_BINS', 'GRANGER_ORDER', 'SPECTRAL_BANDS', 'CV_FOLDS', 'SMOTE_K',
                    'BOOTSTRAP_RESAMPLES', 'BONFERRONI_TESTS', 'WORKERS'):
            if getattr(self, key) < 1:
                raise ConfigError(key, 'must be at least 1')
        if not 0 < self.QUANTILE < 1:
            raise ConfigError('QUANTILE', 'must lie in (0, 1)')
        if not 0 <= self.ELASTIC_L1_RATIO <= 1:
            raise ConfigError('ELASTIC_L1_RATIO', 'must lie in [0, 1]')
        if not 0 < self.PCA_VARIANCE <= 1:
            raise ConfigError('PCA_VARIANCE', 'must lie in (0, 1]')
        if not self.LASSO_ALPHAS:
            raise ConfigError('LASSO_ALPHAS', 'grid is empty')
        if not self.ELASTIC_LAMBDAS:
            raise ConfigError('ELASTIC_LAMBDAS', 'grid is empty')
        for key, allowed in (('FEATURE_SETS', FEATURE_SETS), ('AGGREGATORS', AGGREGATORS), ('STUDIES', STUDIES)):
            bad = [v for v in getattr(self, key) if v not in allowed]
            if bad:
                raise ConfigError(key, f"unknown value(s) {bad}; allowed: {list(allowed)}")
        for stat in self.WINDOW_STATISTICS:
            if stat not in ('mean', 'variance', 'bands'):
                raise ConfigError('WINDOW_STATISTICS', f"unknown statistic {stat!r}")

    def validate_paths(self, keys=PATH_KEYS) -> None:
        """Check that every configured input path exists."""
        for key in keys:
            path = getattr(self, key)
            if path is None:
                raise ConfigError(key, 'input path is not configured')
            if not path.exists():
                raise ConfigError(key, f"input path does not exist: {path}")


def load_settings(path: Optional[str] = None, **overrides) -> Settings:
    """Build settings from a dotenv-format config file.

    Relative paths inside the file are resolved against the file's directory.
    """
    if path is None:
        return Settings(overrides=overrides)
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError('config', f"config file does not exist: {config_path}")
    values = dotenv_values(config_path)
    return Settings(values, base_dir=config_path.resolve().parent, overrides=overrides)


@lru_cache()
def get_settings() -> Settings:
    """Get cached default settings instance."""
    return Settings()
