"""
Pytest configuration for mistura tests.

Shared fixtures: small search grids for fast mixability tests, the common
entropies and losses, and a private notification manager per test.
"""

import os
import sys

import pytest

# Add the project root to the Python path to help with imports
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from mistura.core.models.entropy import EntropySpec
from mistura.core.models.loss import LossSpec
from mistura.core.models.mixability import MixSearchConfig
from mistura.core.notifications import NotificationManager

CONFIG_DIR = os.path.join(project_root, "configs")


@pytest.fixture
def small_search():
    """A coarse search that still locates eta* to a few percent."""
    return MixSearchConfig(
        coarse_resolution=10,
        fine_resolution=40,
        refine_candidates=2,
        regret_resolution=100,
        zoom_levels=6,
        eta_tolerance=1e-2,
    )


@pytest.fixture
def shannon():
    return EntropySpec(kind="shannon")


@pytest.fixture
def tsallis():
    return EntropySpec(kind="tsallis", alpha=-0.5)


@pytest.fixture
def renyi():
    return EntropySpec(kind="renyi", alpha=-0.5)


@pytest.fixture
def quadratic():
    return EntropySpec(kind="quadratic")


@pytest.fixture
def log_loss():
    return LossSpec(kind="log")


@pytest.fixture
def tsallis_loss(tsallis):
    return LossSpec(kind="proper", entropy=tsallis)


@pytest.fixture
def manager():
    return NotificationManager()


@pytest.fixture
def config_path():
    def resolve(name: str) -> str:
        return os.path.join(CONFIG_DIR, name)

    return resolve
