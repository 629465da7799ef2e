#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

import math
import os
import tempfile

os.environ.setdefault("ZLAB_APP_DIR", tempfile.mkdtemp(prefix="zlab-test-"))
os.environ.setdefault("ZLAB_TEST", "true")

import numpy as np
import pytest

from zlab.grid import Field, Grid
from zlab.noise import build_noise_model


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte-Carlo and acceptance-size runs")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return

    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(1234))


@pytest.fixture
def grid2():
    return Grid(2, 32, 2 * math.pi * 8)


@pytest.fixture
def grid4():
    return Grid(4, 16, 2 * math.pi * 8)


@pytest.fixture
def unit_grid():
    "L = 2π: every ladder unit is 1."
    return Grid(2, 8, 2 * math.pi)


@pytest.fixture
def make_field(rng):
    "Complex Gaussian white noise on a grid."

    def factory(grid: Grid) -> Field:
        data = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        return Field(grid, data)

    return factory


@pytest.fixture
def field2(grid2, make_field):
    return make_field(grid2)


@pytest.fixture
def conservative2(grid2):
    return build_noise_model(grid2, "conservative", modes=2, amplitude=0.5)
