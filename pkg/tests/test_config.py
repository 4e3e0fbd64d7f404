"""Test configuration and settings."""

import pytest

from config import get_settings, load_settings
from config.settings import Settings, parse_window
from errors import ConfigError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in ('CONVQ_SEED', 'CONVQ_WORKERS', 'CONVQ_WINDOW_SIZE_S'):
        monkeypatch.delenv(key, raising=False)


def test_settings_loaded():
    """Test that default settings can be loaded."""
    settings = get_settings()
    assert settings is not None
    assert settings.SLICE_LEN_S == 60.0
    assert settings.MIN_DUR_S == 30.0
    assert settings.KAPPA_THRESHOLD == 0.2
    assert settings.FEATURE_SETS == ['tt', 'sync', 'caus', 'conv']
    assert settings.WINDOW_SIZE_S is None


def test_study_window_sizes():
    """Test parsing of the window study sizes."""
    settings = Settings()
    assert settings.STUDY_WINDOW_SIZES_S == [None, 1.0, 3.0, 5.0, 10.0]
    assert parse_window('none', 'X') is None
    assert parse_window('0', 'X') is None
    assert parse_window('2.5', 'X') == 2.5
    with pytest.raises(ConfigError):
        parse_window('-1', 'X')


def test_window_hop_defaults_to_half_overlap():
    """Test hop default of 50% overlap."""
    assert Settings({'WINDOW_SIZE_S': '3'}).window_hop_s == 1.5
    assert Settings({'WINDOW_SIZE_S': '3', 'WINDOW_HOP_S': '1'}).window_hop_s == 1.0
    assert Settings().window_hop_s is None


def test_load_settings_resolves_relative_paths(tmp_path):
    """Test that paths in a config file resolve against its directory."""
    config = tmp_path / 'run.cfg'
    config.write_text('# comment\nACCEL_PATH=data/accel.csv\nSEED=7\n', encoding='utf-8')
    settings = load_settings(str(config))
    assert settings.ACCEL_PATH == tmp_path / 'data' / 'accel.csv'
    assert settings.SEED == 7
    assert settings.OUTPUT_DIR == tmp_path / 'output'


def test_precedence(tmp_path, monkeypatch):
    """Test overrides beat environment, environment beats the file."""
    config = tmp_path / 'run.cfg'
    config.write_text('SEED=1\nCV_FOLDS=3\n', encoding='utf-8')
    monkeypatch.setenv('CONVQ_SEED', '2')
    assert load_settings(str(config)).SEED == 2
    assert load_settings(str(config), SEED=3).SEED == 3
    assert load_settings(str(config)).CV_FOLDS == 3


def test_missing_config_file(tmp_path):
    """Test a missing config file is a configuration error."""
    with pytest.raises(ConfigError):
        load_settings(str(tmp_path / 'absent.cfg'))


def test_unknown_key_rejected():
    """Test unknown keys are rejected with the key name."""
    with pytest.raises(ConfigError) as exc:
        Settings({'NOT_A_KEY': '1'})
    assert exc.value.key == 'NOT_A_KEY'


@pytest.mark.parametrize('key,value', [
    ('QUANTILE', '1.5'),
    ('CV_FOLDS', '0'),
    ('PCA_VARIANCE', '0'),
    ('AGGREGATORS', 'mean,range'),
    ('SLICE_LEN_S', '-60'),
    ('BONFERRONI_TESTS', '0'),
    ('WINDOW_STATISTICS', 'mean,skew'),
])
def test_validate_names_key(key, value):
    """Test validation errors name the offending key."""
    with pytest.raises(ConfigError) as exc:
        Settings({key: value}).validate()
    assert exc.value.key == key


def test_non_numeric_value():
    """Test a non-numeric number fails at construction."""
    with pytest.raises(ConfigError) as exc:
        Settings({'SEED': 'abc'})
    assert exc.value.key == 'SEED'


def test_config_hash():
    """Test config hash is stable and ignores the worker count."""
    base = Settings()
    assert base.config_hash() == Settings().config_hash()
    assert len(base.config_hash()) == 16
    assert base.replace(SEED=99).config_hash() != base.config_hash()
    assert base.replace(WORKERS=4).config_hash() == base.config_hash()


def test_validate_paths(tmp_path):
    """Test missing inputs are reported with their path."""
    settings = Settings({'ACCEL_PATH': str(tmp_path / 'missing.csv')})
    with pytest.raises(ConfigError) as exc:
        settings.validate_paths(['ACCEL_PATH'])
    assert 'missing.csv' in str(exc.value)
    with pytest.raises(ConfigError):
        Settings().validate_paths(['SPEAKING_PATH'])
