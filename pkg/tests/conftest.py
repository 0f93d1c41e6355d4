import math
from functools import lru_cache

import numpy as np
import pytest

from selfsim.ifs import generate_scene
from selfsim.presets import sierpinski_carpet, sierpinski_gasket

SQRT3_2 = math.sqrt(3) / 2

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
UNIT_TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, SQRT3_2]])

CARPET_CONFIG = 'preset = "sierpinski-carpet"\n'
GASKET_CONFIG = 'preset = "sierpinski-gasket"\n'


def regular_polygon(n, radius=1.0, center=(0.0, 0.0), phase=0.0):
    t = phase + 2 * math.pi * np.arange(n) / n
    return np.stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)], axis=1)


@lru_cache(maxsize=None)
def carpet_scene(depth):
    return generate_scene(sierpinski_carpet(), depth)


@lru_cache(maxsize=None)
def gasket_scene(depth):
    return generate_scene(sierpinski_gasket(), depth)


@pytest.fixture
def carpet():
    return sierpinski_carpet()


@pytest.fixture
def gasket():
    return sierpinski_gasket()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_config(tmp_path):
    def _write(text, name="run.cfg"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return _write
