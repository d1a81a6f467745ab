import os
from pathlib import Path
from unittest import mock

import pytest

from mistura.core.config import MisturaConfig, load_config_from_env


def test_config_defaults():
    """Test that the configuration has expected defaults."""
    config = MisturaConfig()

    # Search grids
    assert config.coarse_resolution == 25
    assert config.fine_resolution == 200
    assert config.action_resolution(2) == 200
    assert config.action_resolution(3) == 60

    # Decision tolerances
    assert config.mixable_tolerance == 1e-6
    assert config.bound_tolerance == 1e-5
    assert config.eta_lo == 1e-3
    assert config.eta_hi == 1e3

    assert config.default_seed == 20240601
    assert config.output_dir == Path.home() / ".mistura" / "runs"


def test_config_override(monkeypatch):
    """Test that environment variables override defaults."""
    monkeypatch.setenv("MISTURA_COARSE_RESOLUTION", "30")
    monkeypatch.setenv("MISTURA_ETA_HI", "500")
    monkeypatch.setenv("MISTURA_OUTPUT_DIR", "/tmp/mistura-runs")

    config = load_config_from_env()

    assert config.coarse_resolution == 30
    assert config.eta_hi == 500.0
    assert config.output_dir == Path("/tmp/mistura-runs")
    # Untouched fields keep their defaults
    assert config.fine_resolution == 200


def test_config_from_env_file(tmp_path, monkeypatch):
    """Test that a dotenv file fills in settings without overriding the environment."""
    env_file = tmp_path / ".env"
    env_file.write_text("MISTURA_FINE_RESOLUTION=120\nMISTURA_DEFAULT_SEED=7\n")
    monkeypatch.setenv("MISTURA_DEFAULT_SEED", "11")

    with mock.patch.dict(os.environ):
        os.environ.pop("MISTURA_FINE_RESOLUTION", None)
        config = load_config_from_env(env_file)

    assert config.fine_resolution == 120
    assert config.default_seed == 11
    assert config.env_file == env_file


def test_config_validation():
    """Test that configuration values are validated."""
    with pytest.raises(ValueError):
        MisturaConfig(coarse_resolution=1)

    with pytest.raises(ValueError):
        MisturaConfig(mixable_tolerance=0.0)

    with pytest.raises(ValueError):
        MisturaConfig(eta_lo=10.0, eta_hi=1.0)

    config = MisturaConfig(coarse_resolution=2)
    assert config.coarse_resolution == 2
