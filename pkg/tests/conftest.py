from __future__ import annotations

import numpy as np
import pytest

from hardy_adams.radial import Dimension


@pytest.fixture(scope="session")
def d2():
    return Dimension(2)


@pytest.fixture(scope="session")
def d3():
    return Dimension(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
