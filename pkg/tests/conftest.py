"""Shared fixtures: small point spaces and seeded generators."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add repo root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.chainspace import Point, PointSpace
from src.utils.config import config


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def space():
    """Three scalar points on [0, 1) with a two-dimensional initial space."""
    return PointSpace.uniform(3, horizon=1.0, multiplicity=1, initial_dim=2)


@pytest.fixture
def space_multi():
    """Two points with multiplicities 1 and 2 and uneven weights."""
    return PointSpace((Point(1, 0.0, 0.4, 1), Point(2, 0.5, 0.7, 2)), initial_dim=1)


@pytest.fixture
def empty_space():
    return PointSpace.uniform(0, initial_dim=2)


@pytest.fixture(autouse=True)
def log_dir(tmp_path, monkeypatch):
    """Keep run logs out of the repo's logs/ directory."""
    path = tmp_path / 'logs'
    monkeypatch.setattr(config, 'log_path', path)
    return path
