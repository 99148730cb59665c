"""Test configuration and fixtures."""
import numpy as np
import pytest

from entities.code import PolarCodeSpec
from entities.decoder import DecoderConfig
from interactors.polar_core import construct_bhattacharyya

pytest_plugins = ('pytest_asyncio',)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run acceptance-scale tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator shared by a single test."""
    return np.random.default_rng(1234)


@pytest.fixture
def code_8_4() -> PolarCodeSpec:
    """(8, 4) Bhattacharyya code designed at 0 dB."""
    return construct_bhattacharyya(3, 4, 0.0)


@pytest.fixture
def code_64_32() -> PolarCodeSpec:
    """(64, 32) Bhattacharyya code designed at 0 dB."""
    return construct_bhattacharyya(6, 32, 0.0)


@pytest.fixture
def bp_config() -> DecoderConfig:
    return DecoderConfig(llr_max=20.0, max_iters=60)
