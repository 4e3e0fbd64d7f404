"""Scenario configuration for synthetic mingling datasets."""

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, Optional, Tuple

from dotenv import dotenv_values

from errors import ConfigError

LABEL_RULES = ('coupling', 'coupling_and_equality', 'cardinality')


def _range(text: str, key: str) -> Tuple[float, float]:
    parts = [p.strip() for p in str(text).split(',') if p.strip()]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(key, f"expected 'low,high', got {text!r}")
    if len(values) == 1:
        values = values * 2
    if len(values) != 2 or values[0] > values[1]:
        raise ConfigError(key, f"expected 'low,high' with low <= high, got {text!r}")
    return values[0], values[1]


def _weights(text: str, key: str) -> Dict[int, float]:
    weights = {}
    for part in str(text).split(','):
        if not part.strip():
            continue
        try:
            size, weight = part.split(':')
            weights[int(size)] = float(weight)
        except ValueError:
            raise ConfigError(key, f"expected 'size:weight,...', got {text!r}")
    if not weights or min(weights) < 2 or any(w < 0 for w in weights.values()) or sum(weights.values()) <= 0:
        raise ConfigError(key, 'cardinalities must be >= 2 with non-negative weights')
    return weights


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of a synthetic dataset; ranges are sampled uniformly per group."""

    n_groups: int = 40
    cardinality_weights: Dict[int, float] = field(
        default_factory=lambda: {2: 0.25, 3: 0.25, 4: 0.2, 5: 0.15, 6: 0.1, 7: 0.05}
    )
    duration_s: Tuple[float, float] = (60.0, 150.0)
    rate_hz: float = 20.0
    lag_samples: Tuple[float, float] = (2.0, 10.0)
    coupling: Tuple[float, float] = (0.0, 1.0)
    convergence_rate: Tuple[float, float] = (0.0, 3.0)
    equality_skew: Tuple[float, float] = (0.0, 1.0)
    interruption_rate: Tuple[float, float] = (0.0, 2.0)
    noise_sigma: float = 0.3
    ar_coef: float = 0.95
    mean_turn_s: float = 3.0
    n_raters: int = 3
    rater_noise: float = 0.5
    label_rule: str = 'coupling'
    coupling_threshold: float = 0.5
    skew_threshold: float = 0.5
    slice_len_s: float = 60.0
    min_dur_s: float = 30.0
    seed: int = 7

    def validate(self) -> 'ScenarioConfig':
        if self.n_groups < 1:
            raise ConfigError('N_GROUPS', 'must be at least 1')
        if self.rate_hz <= 0:
            raise ConfigError('RATE_HZ', 'must be greater than 0')
        if self.lag_samples[0] < 0:
            raise ConfigError('LAG_SAMPLES', 'lag must be >= 0')
        if not (0 <= self.coupling[0] and self.coupling[1] <= 1):
            raise ConfigError('COUPLING', 'coupling must lie in [0, 1]')
        if self.equality_skew[0] < 0 or self.interruption_rate[0] < 0 or self.convergence_rate[0] < 0:
            raise ConfigError('EQUALITY_SKEW', 'skew, interruption and convergence rates must be >= 0')
        if self.noise_sigma < 0 or self.rater_noise < 0:
            raise ConfigError('NOISE_SIGMA', 'noise levels must be >= 0')
        if not 0 <= self.ar_coef < 1:
            raise ConfigError('AR_COEF', 'must lie in [0, 1)')
        if self.n_raters < 2:
            raise ConfigError('N_RATERS', 'at least 2 raters are needed for agreement')
        if self.label_rule not in LABEL_RULES:
            raise ConfigError('LABEL_RULE', f"unknown rule {self.label_rule!r}; allowed: {list(LABEL_RULES)}")
        if self.duration_s[0] < self.min_dur_s:
            raise ConfigError('DURATION_S', 'groups shorter than the minimum duration would be dropped')
        if max(self.lag_samples) * 10 >= self.duration_s[0] * self.rate_hz:
            raise ConfigError('LAG_SAMPLES', 'recordings must be longer than 10 lags')
        return self

    def as_dict(self) -> Dict[str, object]:
        return asdict(self)

    @classmethod
    def from_mapping(cls, values: Dict[str, Optional[str]]) -> 'ScenarioConfig':
        """Build from KEY=VALUE pairs (keys are the upper-case field names)."""
        known = {f.name.upper(): f for f in fields(cls)}
        kwargs = {}
        for key, text in values.items():
            key = key.upper()
            if key not in known:
                raise ConfigError(key, 'unknown scenario key')
            if text is None:
                continue
            name = known[key].name
            default = getattr(cls(), name)
            try:
                if name == 'cardinality_weights':
                    kwargs[name] = _weights(text, key)
                elif isinstance(default, tuple):
                    kwargs[name] = _range(text, key)
                elif isinstance(default, bool):
                    kwargs[name] = text.strip().lower() in ('1', 'true', 'yes', 'on')
                elif isinstance(default, int):
                    kwargs[name] = int(text)
                elif isinstance(default, float):
                    kwargs[name] = float(text)
                else:
                    kwargs[name] = text.strip()
            except ValueError:
                raise ConfigError(key, f"invalid value {text!r}")
        return cls(**kwargs).validate()

    @classmethod
    def from_file(cls, path) -> 'ScenarioConfig':
        path = Path(path)
        if not path.exists():
            raise ConfigError('scenario', f"scenario file does not exist: {path}")
        return cls.from_mapping(dotenv_values(path))
