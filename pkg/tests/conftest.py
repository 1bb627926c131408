import numpy as np
import pytest

from ldgm_gc.degree import DegreeDistribution, Perspective
from ldgm_gc.graph import from_explicit_adjacency

# K=4 chunks, N=5 workers; worker degrees 1,2,2,2,2 and chunk degrees 2,3,2,2.
SMALL_NEIGHBORS = [[0], [0, 1], [1, 2], [2, 3], [1, 3]]


@pytest.fixture
def small_graph():
    return from_explicit_adjacency(4, 5, SMALL_NEIGHBORS)


@pytest.fixture
def L3():
    return DegreeDistribution({3: 1.0}, Perspective.NODE_VARIABLE)


@pytest.fixture
def R_high_straggle():
    return DegreeDistribution({1: 0.75, 3: 0.25}, Perspective.NODE_GENERATOR)


@pytest.fixture
def R_low_straggle():
    return DegreeDistribution({1: 0.5, 2: 0.5}, Perspective.NODE_GENERATOR)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
