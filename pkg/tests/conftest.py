import math

import numpy as np
import pytest

from fdsp.evolution import GridSpec
from fdsp.profiles import random_field


@pytest.fixture(scope="session")
def grid1d():
    return GridSpec(1, 128, 4 * math.pi).build()


@pytest.fixture(scope="session")
def grid1d_fine():
    return GridSpec(1, 256, 4 * math.pi).build()


@pytest.fixture(scope="session")
def random_suite(grid1d):
    return [random_field(grid1d, seed, alpha=(0.0, 1.0, 2.0)[seed % 3])
            for seed in range(24)]


def l2_values(values, grid):
    return float(np.sqrt(grid.cell_volume * np.sum(np.abs(values) ** 2)))
