"""Simulated training runs for LDGM-coded SGD, uncoded SGD and a
full-gradient GC baseline.

Per-iteration randomness comes from ``SeedSequence([seed, iteration])`` and
the worker uniforms are drawn first, so LDGM and uncoded runs with the same
seed see common random numbers.
"""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .decoder import peel_decode
from .degree import DegreeDistribution
from .graph import EnsembleSpec, TannerGraph, sample_graph
from .learning import (Dataset, ModelState, aggregate_recovered, apply_update, full_gradient,
                       loss, partial_gradients)
from .timing import StragglerModel, times_from_uniforms

TRACE_COLUMNS = ("scheme", "seed", "iteration", "sim_time", "objective",
                 "recovered_chunks", "stragglers")


class SchemeKind(str, enum.Enum):
    UNCODED_SGD = "uncoded_sgd"
    LDGM_SGD = "ldgm_sgd"
    GC_BASELINE = "gc_baseline"


@dataclass(frozen=True)
class SchemeConfig:
    """One scheme run.

    ``normalize="mean"`` divides both the logged objective and the gradient
    step by ``n`` (mean squared error); ``"sum"`` uses the raw summed loss.
    """

    kind: SchemeKind
    model: StragglerModel
    N: int = 240
    K: int = 120
    code: EnsembleSpec | None = None
    fixed_graph: TannerGraph | None = None
    w: int | None = None
    eta0: float = 0.1
    iterations: int = 100
    seed: int = 0
    normalize: str = "mean"
    resample_graph: bool = False
    strict_wait: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        has_code = self.code is not None or self.fixed_graph is not None
        if has_code != (self.kind is SchemeKind.LDGM_SGD):
            raise ValueError("a code spec or fixed graph is required for, and only for, ldgm_sgd")
        if self.code is not None and self.fixed_graph is not None:
            raise ValueError("give either a code spec or a fixed graph, not both")
        if (self.w is not None) != (self.kind is SchemeKind.GC_BASELINE):
            raise ValueError("w is required for, and only for, gc_baseline")
        for g in (self.code, self.fixed_graph):
            if g is not None and (g.K, g.N) != (self.K, self.N):
                raise ValueError("code K/N disagree with the scheme's K/N")
        if self.normalize not in ("mean", "sum"):
            raise ValueError(f"normalize must be 'mean' or 'sum', got {self.normalize!r}")
        if self.iterations < 0 or self.eta0 <= 0:
            raise ValueError("iterations must be >= 0 and eta0 > 0")

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind.value,
            "model": self.model.to_dict(),
            "N": self.N,
            "K": self.K,
            "eta0": self.eta0,
            "iterations": self.iterations,
            "seed": self.seed,
            "normalize": self.normalize,
        }
        if self.code is not None:
            out["code"] = {
                "var_dist": self.code.var_dist.to_dict(),
                "gen_dist": self.code.gen_dist.to_dict(),
                "rng_seed": self.code.rng_seed,
                "resample_graph": self.resample_graph,
            }
        if self.fixed_graph is not None:
            graph_json = self.fixed_graph.to_json().encode()
            out["fixed_graph_sha256"] = hashlib.sha256(graph_json).hexdigest()
        if self.w is not None:
            out["w"] = self.w
            out["strict_wait"] = self.strict_wait
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class IterationResult:
    state: ModelState
    recovered: int
    stragglers: int
    elapsed: float


@dataclass
class TraceRow:
    iteration: int
    sim_time: float
    objective: float
    recovered_chunks: int
    stragglers: int


@dataclass
class ExperimentTrace:
    scheme: str
    seed: int
    config_hash: str
    rows: list[TraceRow] = field(default_factory=list)

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.rows])

    @property
    def times(self) -> np.ndarray:
        return np.array([r.sim_time for r in self.rows])

    def csv_rows(self) -> Iterable[list]:
        for r in self.rows:
            yield [self.scheme, self.seed, r.iteration, repr(r.sim_time), repr(r.objective),
                   r.recovered_chunks, r.stragglers]


def traces_to_csv(traces: Iterable[ExperimentTrace]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for tr in traces:
        writer.writerows(tr.csv_rows())
    return buf.getvalue()


def iteration_rng(seed, iteration: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(iteration)]))


def run_iteration_ldgm(graph: TannerGraph, model: StragglerModel, dataset: Dataset,
                       state: ModelState, seed, iteration: int = 0,
                       scale: float = 1.0) -> IterationResult:
    if dataset.num_chunks != graph.K:
        raise ValueError(f"dataset has {dataset.num_chunks} chunks, graph has K={graph.K}")
    rng = iteration_rng(seed, iteration)
    timing = times_from_uniforms(model, graph.loads(), rng.random(graph.N))
    g = partial_gradients(dataset, state.w)
    payloads = [None if late else g[list(nbrs)].sum(axis=0)
                for nbrs, late in zip(graph.neighbors, timing.is_straggler)]
    outcome = peel_decode(graph, payloads)
    estimate = aggregate_recovered(outcome, dataset.d)
    return IterationResult(apply_update(state, scale * estimate), outcome.num_recovered,
                           timing.num_stragglers, model.t0)


def run_iteration_uncoded(N: int, model: StragglerModel, dataset: Dataset, state: ModelState,
                          seed, iteration: int = 0, K: int | None = None,
                          scale: float = 1.0) -> IterationResult:
    """Each of ``N`` workers owns one of ``N`` chunks and runs ``N/K`` times faster
    than a coded worker with a single chunk of size ``n/K``."""
    if dataset.n % N:
        raise ValueError(f"N={N} does not divide n={dataset.n}")
    K = dataset.num_chunks if K is None else K
    rng = iteration_rng(seed, iteration)
    timing = times_from_uniforms(model, np.full(N, K / N), rng.random(N))
    data = dataset if dataset.num_chunks == N else dataset.rechunk(N)
    g = partial_gradients(data, state.w)
    estimate = np.zeros(dataset.d)
    for j in np.flatnonzero(timing.alive):
        estimate += g[j]
    return IterationResult(apply_update(state, scale * estimate), int(timing.alive.sum()),
                           timing.num_stragglers, model.t0)


def expected_wait_rs(w: int, mu: float, N: int, K: int, strict: bool = False) -> float:
    """Expected per-iteration wait of the Reed-Solomon GC baseline.

    ``H_m / (mu w)`` with ``m = N - floor(w N / K) + 1``; ``strict=True``
    uses the ``mu / w`` prefactor instead, which does not scale like a time.
    """
    if not 1 <= w <= K:
        raise ValueError(f"w must be in [1, K={K}], got {w}")
    if mu <= 0 or N < 1 or K < 1:
        raise ValueError("mu, N and K must be positive")
    m = N - (w * N) // K + 1
    if m < 1:
        raise ValueError(f"w={w} leaves no workers to wait for (N={N}, K={K})")
    harmonic = math.fsum(1.0 / i for i in range(1, m + 1))
    return (mu / w if strict else 1.0 / (mu * w)) * harmonic


def run_iteration_gc_baseline(model: StragglerModel, dataset: Dataset, state: ModelState,
                              w: int, N: int, K: int, scale: float = 1.0,
                              strict: bool = False) -> IterationResult:
    """Exact gradient step, charged the expected wait of the RS-coded scheme."""
    elapsed = expected_wait_rs(w, model.mu, N, K, strict)
    new_state = apply_update(state, scale * full_gradient(dataset, state.w))
    return IterationResult(new_state, K, (w * N) // K - 1, elapsed)


def run_experiment(config: SchemeConfig, dataset: Dataset) -> ExperimentTrace:
    """Run ``config.iterations`` updates from ``w = 0``, logging the objective
    after each one (row 0 is the starting point)."""
    scale = 1.0 / dataset.n if config.normalize == "mean" else 1.0
    state = ModelState.zeros(dataset.d, config.eta0)
    trace = ExperimentTrace(config.kind.value, config.seed, config.config_hash())
    clock = 0.0
    trace.rows.append(TraceRow(0, clock, scale * loss(dataset, state.w), 0, 0))

    kind = config.kind
    coded = dataset if dataset.num_chunks == config.K else dataset.rechunk(config.K)
    uncoded = dataset.rechunk(config.N) if kind is SchemeKind.UNCODED_SGD else None
    graph = None
    if kind is SchemeKind.LDGM_SGD:
        graph = config.fixed_graph or sample_graph(config.code)

    for it in range(1, config.iterations + 1):
        if kind is SchemeKind.LDGM_SGD:
            if config.resample_graph and config.code is not None and it > 1:
                code = config.code
                graph = sample_graph(EnsembleSpec(code.K, code.N, code.var_dist, code.gen_dist,
                                                  [code.rng_seed, it]))
            res = run_iteration_ldgm(graph, config.model, coded, state, config.seed, it, scale)
        elif kind is SchemeKind.UNCODED_SGD:
            res = run_iteration_uncoded(config.N, config.model, uncoded, state, config.seed, it,
                                        K=config.K, scale=scale)
        else:
            res = run_iteration_gc_baseline(config.model, coded, state, config.w, config.N,
                                            config.K, scale, config.strict_wait)
        state = res.state
        clock += res.elapsed
        trace.rows.append(TraceRow(it, clock, scale * loss(dataset, state.w),
                                   res.recovered, res.stragglers))
    return trace


def ldgm_config(model: StragglerModel, var_dist: DegreeDistribution, gen_dist: DegreeDistribution,
                N: int = 240, K: int = 120, seed: int = 0, **kw) -> SchemeConfig:
    """LDGM scheme config whose code is sampled from a seed derived from ``seed``."""
    code = EnsembleSpec(K, N, var_dist, gen_dist, graph_seed(seed))
    return SchemeConfig(SchemeKind.LDGM_SGD, model, N=N, K=K, code=code, seed=seed, **kw)


def graph_seed(seed: int) -> int:
    return int(np.random.SeedSequence([int(seed), 0x6C64676D]).generate_state(2, np.uint32)
               .view(np.uint64)[0])
