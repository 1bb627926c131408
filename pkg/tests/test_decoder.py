import numpy as np
import pytest

from ldgm_gc.de import predict_unrecovered
from ldgm_gc.decoder import (DecodeError, WorkerComputation, peel_decode, recover_erasures,
                             verify_against_truth)
from ldgm_gc.degree import DegreeDistribution, Perspective
from ldgm_gc.graph import EnsembleSpec, from_explicit_adjacency, sample_graph
from ldgm_gc.timing import StragglerModel, sample_worker_times


def encode(graph, grads, alive):
    return [grads[list(nbrs)].sum(axis=0) if a else None
            for nbrs, a in zip(graph.neighbors, alive)]


def random_instance(rng, K, N, max_deg=3):
    nbrs = [sorted(rng.choice(K, size=rng.integers(1, max_deg + 1), replace=False))
            for _ in range(N)]
    return from_explicit_adjacency(K, N, nbrs)


@pytest.fixture
def tiny():
    return from_explicit_adjacency(2, 3, [[0], [1], [0, 1]])


def test_hand_peel(tiny):
    g = np.array([[1.0, 2.0], [10.0, -3.0]])
    out = peel_decode(tiny, encode(tiny, g, [True, False, True]))
    assert out.recovered == {0, 1}
    np.testing.assert_array_equal(out.values[1], g[1])
    assert out.peeling_rounds == 2
    assert out.residual_unknowns == 0


def test_stopping_set(tiny):
    g = np.eye(2)
    out = peel_decode(tiny, encode(tiny, g, [False, False, True]))
    assert out.recovered == frozenset()
    assert out.residual_unknowns == 2
    assert out.peeling_rounds == 0


def test_worker_computation_objects(tiny):
    g = np.array([[1.0], [2.0]])
    comps = [WorkerComputation(0, g[0]), WorkerComputation(1), WorkerComputation(2, g[0] + g[1])]
    out = peel_decode(tiny, comps)
    assert out.recovered == {0, 1}
    assert comps[2].payload[0] == 3.0  # inputs untouched


def test_inputs_not_mutated(small_graph, rng):
    g = rng.standard_normal((4, 3))
    payloads = encode(small_graph, g, [True] * 5)
    before = [p.copy() for p in payloads]
    peel_decode(small_graph, payloads)
    for a, b in zip(payloads, before):
        np.testing.assert_array_equal(a, b)


def test_no_stragglers_small_graph(small_graph, rng):
    g = rng.integers(-5, 5, size=(4, 6)).astype(float)
    out = peel_decode(small_graph, encode(small_graph, g, [True] * 5))
    assert out.recovered == {0, 1, 2, 3}
    assert verify_against_truth(out, g) == 0.0


def test_errors(tiny):
    with pytest.raises(DecodeError, match="expected 3"):
        peel_decode(tiny, [None, None])
    with pytest.raises(DecodeError, match="dimension"):
        peel_decode(tiny, [np.zeros(2), np.zeros(3), None])
    with pytest.raises(DecodeError, match="worker_id"):
        peel_decode(tiny, [WorkerComputation(1), WorkerComputation(1), WorkerComputation(2)])


def test_max_rounds(tiny):
    g = np.eye(2)
    out = peel_decode(tiny, encode(tiny, g, [True, False, True]), max_rounds=1)
    assert out.recovered == {0}


def test_verify_against_truth_cases(rng):
    g = from_explicit_adjacency(100, 200, [[k % 100, (k * 7 + 3) % 100] if k % 3 else [k % 100]
                                           for k in range(200)])
    truth = rng.standard_normal((100, 100))
    alive = rng.random(200) < 0.8
    out = peel_decode(g, encode(g, truth, alive))
    assert len(out.recovered) > 0
    assert verify_against_truth(out, truth) < 1e-9
    empty = peel_decode(g, [None] * 200)
    assert verify_against_truth(empty, truth) == 0.0


def test_payload_free_path_matches(rng):
    for _ in range(20):
        g = random_instance(rng, 30, 45)
        alive = rng.random(45) < 0.6
        out = peel_decode(g, encode(g, rng.standard_normal((30, 2)), alive))
        mask = recover_erasures(g, alive)
        assert set(np.flatnonzero(mask)) == out.recovered


def test_outcome_json(tiny):
    out = peel_decode(tiny, encode(tiny, np.eye(2), [True, False, True]))
    d = out.to_dict(include_values=True)
    assert d["recovered"] == [0, 1] and d["values"]["1"] == [0.0, 1.0]


def test_matches_density_evolution():
    L = DegreeDistribution({3: 1.0}, Perspective.NODE_VARIABLE)
    R = DegreeDistribution({1: 0.5, 2: 0.5}, Perspective.NODE_GENERATOR)
    model = StragglerModel(mu=1.0)
    fracs = []
    for seed in range(20):
        g = sample_graph(EnsembleSpec(1000, 2000, L, R, seed))
        alive = sample_worker_times(model, g, [seed, 7]).alive
        fracs.append(recover_erasures(g, alive).mean())
    assert abs(np.mean(fracs) - (1 - predict_unrecovered(L, R, model))) < 0.03


@pytest.mark.parametrize("seed", range(10))
def test_order_independence_and_monotonicity(seed):
    rng = np.random.default_rng(seed)
    g = random_instance(rng, 40, 60)
    alive = rng.random(60) < 0.5
    base = recover_erasures(g, alive)
    for _ in range(5):
        shuffled = recover_erasures(g, alive, rng=np.random.default_rng(rng.integers(1 << 30)))
        np.testing.assert_array_equal(shuffled, base)
    for j in np.flatnonzero(~alive):
        more = alive.copy()
        more[j] = True
        assert np.all(recover_erasures(g, more) >= base)
