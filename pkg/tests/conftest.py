"""Shared fixtures.  Continued families are expensive, so they are built once per session."""

import numpy as np
import pytest

from vortexfloquet.continuation import continue_family
from vortexfloquet.domains import SyntheticQuadratic, UnitDisc
from vortexfloquet.equilibria import make_vortex_pair

GRID = tuple(np.round(0.05 + 0.025 * np.arange(7), 12))


@pytest.fixture(scope="session")
def grid():
    return GRID


@pytest.fixture(scope="session")
def pair():
    return make_vortex_pair(1.0, 1.0)


@pytest.fixture(scope="session")
def disc_family(pair):
    fam = continue_family(UnitDisc(), pair, GRID)
    fam.raise_if_failed()
    return fam


@pytest.fixture(scope="session")
def saddle_family(pair):
    fam = continue_family(SyntheticQuadratic(), pair, GRID)
    fam.raise_if_failed()
    return fam
