"""Tanner graphs of the LDGM gradient code and ensemble sampling.

Variables are data chunks ``0..K-1``; generators are workers ``0..N-1``.
Worker ``j`` stores the chunks in ``neighbors[j]`` and returns the sum of
their partial gradients.  Indices are zero-based throughout.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .degree import DegreeDistribution, Perspective, average_degree

log = logging.getLogger(__name__)

MAX_REDRAWS = 100


class GraphConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class TannerGraph:
    num_variables: int
    num_generators: int
    neighbors: tuple[tuple[int, ...], ...]
    variable_neighbors: tuple[tuple[int, ...], ...]

    @property
    def K(self) -> int:
        return self.num_variables

    @property
    def N(self) -> int:
        return self.num_generators

    @property
    def num_edges(self) -> int:
        return sum(len(s) for s in self.neighbors)

    def loads(self) -> np.ndarray:
        """Number of chunks stored by each worker."""
        return np.array([len(s) for s in self.neighbors], dtype=np.int64)

    def variable_degrees(self) -> np.ndarray:
        return np.array([len(s) for s in self.variable_neighbors], dtype=np.int64)

    def generator_matrix(self) -> np.ndarray:
        """Dense N x K 0/1 incidence matrix (row j sums chunks of worker j)."""
        G = np.zeros((self.N, self.K))
        for j, nbrs in enumerate(self.neighbors):
            G[j, list(nbrs)] = 1.0
        return G

    def to_dict(self) -> dict:
        return {"K": self.K, "N": self.N, "neighbors": [list(s) for s in self.neighbors]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, obj: dict) -> "TannerGraph":
        try:
            return from_explicit_adjacency(int(obj["K"]), int(obj["N"]), obj["neighbors"])
        except (KeyError, TypeError) as exc:
            raise GraphConstructionError(f"bad graph object: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "TannerGraph":
        return cls.from_dict(json.loads(text))


def from_explicit_adjacency(K: int, N: int, neighbors: Sequence[Iterable[int]]) -> TannerGraph:
    if K < 1 or N < 1:
        raise GraphConstructionError(f"K and N must be positive, got K={K}, N={N}")
    if len(neighbors) != N:
        raise GraphConstructionError(f"expected {N} neighbor sets, got {len(neighbors)}")
    rows = []
    reverse: list[list[int]] = [[] for _ in range(K)]
    for j, nbrs in enumerate(neighbors):
        nbrs = [int(k) for k in nbrs]
        if len(set(nbrs)) != len(nbrs):
            raise GraphConstructionError(f"worker {j} lists a chunk twice: {nbrs}")
        for k in nbrs:
            if not 0 <= k < K:
                raise GraphConstructionError(f"worker {j}: chunk index {k} out of range [0, {K})")
            reverse[k].append(j)
        rows.append(tuple(sorted(nbrs)))
    return TannerGraph(K, N, tuple(rows), tuple(tuple(r) for r in reverse))


def apportion(total: int, dist: DegreeDistribution) -> dict[int, int]:
    """Largest-remainder node counts per degree, summing to ``total``.

    Ties in the fractional part go to the lower degree.
    """
    exact = {d: total * m for d, m in dist.coeffs}
    counts = {d: int(np.floor(v + 1e-9)) for d, v in exact.items()}
    short = total - sum(counts.values())
    order = sorted(exact, key=lambda d: (-(exact[d] - counts[d]), d))
    for d in order[:max(short, 0)]:
        counts[d] += 1
    return counts


@dataclass(frozen=True)
class EnsembleSpec:
    """Finite-length member of the ensemble G(K, N, lambda, rho).

    Both distributions are node-perspective (``L`` and ``R``).
    """

    K: int
    N: int
    var_dist: DegreeDistribution
    gen_dist: DegreeDistribution
    rng_seed: int = 0

    def __post_init__(self):
        if not (self.var_dist.perspective.is_node and self.gen_dist.perspective.is_node):
            raise GraphConstructionError("ensemble distributions must be node-perspective")

    @property
    def design_edges(self) -> tuple[float, float]:
        return self.K * average_degree(self.var_dist), self.N * average_degree(self.gen_dist)


def _stub_degrees(total: int, dist: DegreeDistribution, rng: np.random.Generator) -> np.ndarray:
    counts = apportion(total, dist)
    degs = np.concatenate([np.full(c, d, dtype=np.int64) for d, c in sorted(counts.items())])
    return rng.permutation(degs)


def sample_graph(spec: EnsembleSpec) -> TannerGraph:
    """Configuration-model sample with seeded stub matching.

    The stub permutation is redrawn up to ``MAX_REDRAWS`` times to avoid a
    chunk appearing twice at one worker; after that duplicates are collapsed
    and the lost edges are logged.
    """
    rng = np.random.default_rng(spec.rng_seed)
    var_deg = _stub_degrees(spec.K, spec.var_dist, rng)
    gen_deg = _stub_degrees(spec.N, spec.gen_dist, rng)
    var_stubs = np.repeat(np.arange(spec.K), var_deg)
    gen_stubs = np.repeat(np.arange(spec.N), gen_deg)
    if len(var_stubs) != len(gen_stubs):
        raise GraphConstructionError(
            f"unbalanced stubs: {len(var_stubs)} variable-side vs {len(gen_stubs)} generator-side")

    for _ in range(MAX_REDRAWS):
        matched = var_stubs[rng.permutation(len(var_stubs))]
        keys = gen_stubs * spec.K + matched
        if len(np.unique(keys)) == len(keys):
            break
    else:
        deficit = len(keys) - len(np.unique(keys))
        log.warning("collapsed %d multi-edges after %d redraws (K=%d, N=%d)",
                    deficit, MAX_REDRAWS, spec.K, spec.N)

    neighbors: list[set[int]] = [set() for _ in range(spec.N)]
    for j, k in zip(gen_stubs.tolist(), matched.tolist()):
        neighbors[j].add(k)
    return from_explicit_adjacency(spec.K, spec.N, [sorted(s) for s in neighbors])


def empirical_degree_histogram(graph: TannerGraph, side: str) -> DegreeDistribution:
    """Normalized node-degree histogram of ``side`` ("variable" or "generator").

    Degree-0 nodes have no representation in a degree distribution and are
    left out of the normalization.
    """
    if side == "variable":
        degs, persp = graph.variable_degrees(), Perspective.NODE_VARIABLE
    elif side == "generator":
        degs, persp = graph.loads(), Perspective.NODE_GENERATOR
    else:
        raise ValueError(f"side must be 'variable' or 'generator', got {side!r}")
    degs = degs[degs > 0]
    values, counts = np.unique(degs, return_counts=True)
    return DegreeDistribution(
        {int(v): c / len(degs) for v, c in zip(values, counts)}, persp, normalize=True)
