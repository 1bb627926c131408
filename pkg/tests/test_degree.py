import json

import pytest
from hypothesis import given, strategies as st

from ldgm_gc.degree import (DegreeDistribution, InvalidDistributionError, Perspective,
                            average_degree, design_rate, edge_to_node, node_to_edge)

NV, EV = Perspective.NODE_VARIABLE, Perspective.EDGE_VARIABLE
NG, EG = Perspective.NODE_GENERATOR, Perspective.EDGE_GENERATOR


def close(a: DegreeDistribution, b: dict, tol=1e-12):
    assert set(a.masses) == set(b)
    for d, m in b.items():
        assert a.mass(d) == pytest.approx(m, abs=tol)


def test_regular_is_perspective_invariant():
    lam = node_to_edge(DegreeDistribution({3: 1.0}, NV))
    assert lam.perspective is EV
    assert lam.masses == {3: 1.0}
    # lambda(x) = x^2
    assert lam(0.5) == pytest.approx(0.25)


@pytest.mark.parametrize("node, edge", [
    ({1: 0.75, 3: 0.25}, {1: 0.5, 3: 0.5}),
    ({1: 0.5, 2: 0.5}, {1: 1 / 3, 2: 2 / 3}),
])
def test_node_to_edge_hand_derivatives(node, edge):
    close(node_to_edge(DegreeDistribution(node, NG)), edge)


@pytest.mark.parametrize("edge, node", [
    ({3: 1.0}, {3: 1.0}),
    ({1: 0.5, 3: 0.5}, {1: 0.75, 3: 0.25}),
    ({1: 1.0}, {1: 1.0}),
])
def test_edge_to_node(edge, node):
    close(edge_to_node(DegreeDistribution(edge, EG)), node)


@pytest.mark.parametrize("coeffs, avg", [
    ({3: 1.0}, 3.0), ({1: 0.75, 3: 0.25}, 1.5), ({1: 0.5, 2: 0.5}, 1.5)])
def test_average_degree(coeffs, avg):
    assert average_degree(DegreeDistribution(coeffs, NG)) == pytest.approx(avg, abs=1e-15)


def test_design_rate_reference_pairs():
    L = DegreeDistribution({3: 1.0}, NV)
    assert design_rate(L, DegreeDistribution({1: 0.75, 3: 0.25}, NG)) == pytest.approx(0.5)
    assert design_rate(L, DegreeDistribution({1: 0.5, 2: 0.5}, NG)) == pytest.approx(0.5)
    R = DegreeDistribution({2: 0.4, 5: 0.6}, NG)
    assert design_rate(DegreeDistribution(R.masses, NV), R) == 1.0


def test_edge_reading_of_reference_rho_gives_rate_point_four():
    # rho(x) = 3/4 + x^2/4 read as an edge-perspective distribution
    R = edge_to_node(DegreeDistribution({1: 0.75, 3: 0.25}, EG))
    assert design_rate(DegreeDistribution({3: 1.0}, NV), R) == pytest.approx(0.4)


@pytest.mark.parametrize("coeffs, msg", [
    ({0: 1.0}, "degree"),
    ({1: -0.5, 2: 1.5}, "negative"),
    ({1: 0.5, 2: 0.4}, "sum"),
    ({}, "no mass"),
])
def test_invalid(coeffs, msg):
    with pytest.raises(InvalidDistributionError, match=msg):
        DegreeDistribution(coeffs, NV)


def test_max_degree_and_normalize():
    with pytest.raises(InvalidDistributionError, match="max degree"):
        DegreeDistribution({9: 1.0}, NV, max_degree=8)
    d = DegreeDistribution({1: 2.0, 2: 2.0}, NV, normalize=True)
    assert d.masses == {1: 0.5, 2: 0.5}


def test_wrong_perspective_rejected():
    with pytest.raises(InvalidDistributionError):
        node_to_edge(DegreeDistribution({1: 1.0}, EG))
    with pytest.raises(InvalidDistributionError):
        average_degree(DegreeDistribution({1: 1.0}, EV))


def test_json_round_trip():
    d = DegreeDistribution({1: 0.75, 3: 0.25}, NG)
    obj = json.loads(d.to_json())
    assert obj == {"perspective": "node_generator", "coeffs": {"1": 0.75, "3": 0.25}}
    assert DegreeDistribution.from_json(d.to_json()) == d


masses = st.dictionaries(st.integers(1, 30), st.floats(0.01, 1.0), min_size=1, max_size=6)


@given(masses)
def test_round_trip_property(raw):
    L = DegreeDistribution(raw, NV, normalize=True)
    back = edge_to_node(node_to_edge(L))
    for d in L.masses:
        assert back.mass(d) == pytest.approx(L.mass(d), abs=1e-12)
    lam = DegreeDistribution(raw, EV, normalize=True)
    again = node_to_edge(edge_to_node(lam))
    for d in lam.masses:
        assert again.mass(d) == pytest.approx(lam.mass(d), abs=1e-12)


@given(masses, masses)
def test_rate_identity(a, b):
    L = DegreeDistribution(a, NV, normalize=True)
    R = DegreeDistribution(b, NG, normalize=True)
    assert design_rate(L, R) * average_degree(L) == pytest.approx(average_degree(R), rel=1e-12)
