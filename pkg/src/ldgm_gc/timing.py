"""Worker completion-time model and straggler marking.

A worker holding ``load`` chunks finishes by time ``t`` with probability
``F(t / load)`` for a base CDF ``F``.  Workers slower than the threshold
``t0`` are stragglers and their results are treated as erased.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import TannerGraph


@dataclass(frozen=True)
class StragglerModel:
    mu: float = 1.0
    t0: float = 1.0
    base_cdf: str = "exponential"

    def __post_init__(self):
        if self.base_cdf != "exponential":
            raise ValueError(f"unsupported base_cdf {self.base_cdf!r}")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be positive and finite, got {self.mu}")
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")

    def cdf(self, t: float | np.ndarray) -> float | np.ndarray:
        return -np.expm1(-self.mu * np.maximum(t, 0.0))

    def inverse_cdf(self, u: np.ndarray) -> np.ndarray:
        return -np.log1p(-u) / self.mu

    def to_dict(self) -> dict:
        return {"mu": self.mu, "t0": self.t0, "base_cdf": self.base_cdf}

    @classmethod
    def from_dict(cls, obj: dict) -> "StragglerModel":
        return cls(mu=float(obj.get("mu", 1.0)), t0=float(obj.get("t0", 1.0)),
                   base_cdf=obj.get("base_cdf", "exponential"))


@dataclass(frozen=True)
class WorkerTiming:
    completion_time: np.ndarray
    is_straggler: np.ndarray

    @property
    def num_stragglers(self) -> int:
        return int(self.is_straggler.sum())

    @property
    def alive(self) -> np.ndarray:
        return ~self.is_straggler


def _check_load(load) -> None:
    if np.any(np.asarray(load) < 1):
        raise ValueError("load must be >= 1; a worker with no chunks has no completion time")


def scaled_cdf(model: StragglerModel, load: int, t: float) -> float:
    _check_load(load)
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return float(model.cdf(t / load))


def straggler_probability(model: StragglerModel, load: int) -> float:
    """P(completion time > t0) for a worker holding ``load`` chunks."""
    _check_load(load)
    return math.exp(-model.mu * model.t0 / load)


def survival_probability(model: StragglerModel, load: int) -> float:
    """P(worker finishes by t0); the complement of :func:`straggler_probability`."""
    _check_load(load)
    return float(model.cdf(model.t0 / load))


def uncoded_worker_time_cdf(model: StragglerModel, N: int, K: int, t: float) -> float:
    """CDF of an uncoded worker, whose batch is ``K/N`` the size of a coded chunk."""
    if N < 1 or K < 1:
        raise ValueError("N and K must be >= 1")
    return float(model.cdf(N * t / K))


def times_from_uniforms(model: StragglerModel, loads: np.ndarray, u: np.ndarray) -> WorkerTiming:
    """Inverse-CDF completion times for given uniforms.

    Workers with zero load finish at time 0 and never straggle.  Taking the
    uniforms as input lets schemes share random numbers.
    """
    loads = np.asarray(loads, dtype=float)
    times = model.inverse_cdf(u) * loads
    return WorkerTiming(times, times > model.t0)


def sample_worker_times(model: StragglerModel, graph: TannerGraph, rng_seed) -> WorkerTiming:
    rng = np.random.default_rng(rng_seed)
    return times_from_uniforms(model, graph.loads(), rng.random(graph.N))


def sample_uncoded_times(model: StragglerModel, N: int, K: int, rng_seed) -> WorkerTiming:
    """Uncoded workers: completion times distributed as ``F(N t / K)``."""
    rng = np.random.default_rng(rng_seed)
    return times_from_uniforms(model, np.full(N, K / N), rng.random(N))
