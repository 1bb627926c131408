"""Peeling decoder for partial gradients.

Each non-straggling worker reports the sum of the partial gradients of its
chunks.  The master repeatedly finds a worker whose sum has exactly one
unknown chunk left, reads that chunk off the residual, and subtracts it from
every other surviving worker that stores it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import TannerGraph


class DecodeError(ValueError):
    pass


@dataclass
class WorkerComputation:
    worker_id: int
    payload: np.ndarray | None = None

    @property
    def erased(self) -> bool:
        return self.payload is None


@dataclass
class DecodeOutcome:
    recovered: frozenset[int]
    values: dict[int, np.ndarray] = field(repr=False)
    peeling_rounds: int
    residual_unknowns: int

    @property
    def num_recovered(self) -> int:
        return len(self.recovered)

    def to_dict(self, include_values: bool = False) -> dict:
        out = {
            "recovered": sorted(self.recovered),
            "peeling_rounds": self.peeling_rounds,
            "residual_unknowns": self.residual_unknowns,
        }
        if include_values:
            out["values"] = {str(k): self.values[k].tolist() for k in sorted(self.values)}
        return out


def _peel(graph: TannerGraph, alive: np.ndarray, residual: np.ndarray | None,
          max_rounds: int | None, rng: np.random.Generator | None):
    """Shared peeling loop.

    Work proceeds in rounds: every worker that has exactly one unknown chunk
    at the start of a round is processed, lowest index first (or in random
    order when ``rng`` is given).  Returns the resolving worker per chunk
    (-1 if unresolved), the recovered values, and the round count.
    """
    alive = [bool(a) for a in alive]
    unknown = [len(nbrs) if a else 0 for nbrs, a in zip(graph.neighbors, alive)]
    resolved_by = [-1] * graph.K
    values: dict[int, np.ndarray] = {}

    ready = [j for j, u in enumerate(unknown) if u == 1]
    rounds = 0
    while ready and (max_rounds is None or rounds < max_rounds):
        rounds += 1
        if rng is None:
            ready.sort()
        else:
            rng.shuffle(ready)
        nxt = []
        for j in ready:
            if unknown[j] != 1:
                continue
            k = next(k for k in graph.neighbors[j] if resolved_by[k] < 0)
            resolved_by[k] = j
            if residual is not None:
                values[k] = residual[j].copy()
            for jj in graph.variable_neighbors[k]:
                if not alive[jj]:
                    continue
                unknown[jj] -= 1
                if residual is not None and jj != j:
                    residual[jj] -= values[k]
                if unknown[jj] == 1:
                    nxt.append(jj)
        ready = nxt
    resolved_by = np.array(resolved_by, dtype=np.int64)
    return resolved_by, values, rounds


def recover_erasures(graph: TannerGraph, alive: Sequence[bool], max_rounds: int | None = None,
                     rng: np.random.Generator | None = None) -> np.ndarray:
    """Boolean mask of chunks the peeling decoder recovers, without payloads."""
    alive = np.asarray(alive, dtype=bool)
    if alive.shape != (graph.N,):
        raise DecodeError(f"expected {graph.N} worker flags, got shape {alive.shape}")
    resolved_by, _, _ = _peel(graph, alive, None, max_rounds, rng)
    return resolved_by >= 0


def _as_payloads(graph: TannerGraph, computations) -> list[np.ndarray | None]:
    if len(computations) != graph.N:
        raise DecodeError(f"expected {graph.N} worker computations, got {len(computations)}")
    payloads = []
    for j, c in enumerate(computations):
        if isinstance(c, WorkerComputation):
            if c.worker_id != j:
                raise DecodeError(f"computation at position {j} has worker_id {c.worker_id}")
            c = c.payload
        payloads.append(None if c is None else np.asarray(c, dtype=float))
    return payloads


def peel_decode(graph: TannerGraph, computations: Sequence, max_rounds: int | None = None,
                rng: np.random.Generator | None = None) -> DecodeOutcome:
    """Recover as many partial gradients as peeling allows.

    ``computations`` holds one entry per worker: a :class:`WorkerComputation`,
    a payload vector, or ``None`` for a straggler.  Inputs are not mutated.
    """
    payloads = _as_payloads(graph, computations)
    present = [p for p in payloads if p is not None]
    dims = {p.shape for p in present}
    if len(dims) > 1:
        raise DecodeError(f"payload dimension mismatch: {sorted(dims)}")
    alive = np.array([p is not None for p in payloads], dtype=bool)
    dim = present[0].shape if present else (0,)
    residual = np.zeros((graph.N,) + dim)
    for j, p in enumerate(payloads):
        if p is not None:
            residual[j] = p

    resolved_by, values, rounds = _peel(graph, alive, residual, max_rounds, rng)
    recovered = frozenset(int(k) for k in np.flatnonzero(resolved_by >= 0))
    return DecodeOutcome(recovered, values, rounds, graph.K - len(recovered))


def verify_against_truth(outcome: DecodeOutcome, true_gradients: Sequence[np.ndarray]) -> float:
    """Max absolute deviation of recovered chunks from their true values."""
    err = 0.0
    for k in outcome.recovered:
        err = max(err, float(np.max(np.abs(outcome.values[k] - np.asarray(true_gradients[k])),
                                    initial=0.0)))
    return err
