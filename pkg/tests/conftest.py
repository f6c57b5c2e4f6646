# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import logging

import numpy as np
import pytest

from acmswap import loader
from acmswap.levelset import LevelSet


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def image8(rng):
    return rng.integers(0, 256, size=(8, 8)).astype(np.float64)


@pytest.fixture
def phi8(rng):
    return LevelSet(rng.uniform(-2.0, 2.0, size=(8, 8)))


@pytest.fixture
def step_image():
    """Bright square on a dark background"""
    image = np.full((24, 24), 40.0)
    image[8:16, 8:16] = 200.0
    return image


@pytest.fixture(params=["rsf", "lif", "lgdf"])
def two_phase_model(request):
    return loader.get_model(request.param)


@pytest.fixture(autouse=True)
def restore_root_logger():
    """The batch runner replaces root handlers, put pytest's back afterwards"""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers = handlers
    root.setLevel(level)
    logging.captureWarnings(False)
