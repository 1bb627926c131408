"""Density evolution for peeling over the straggler channel, and a grid
search over generator degree distributions.

Messages are erasure probabilities on edges of the tree-like ensemble limit:

    y_1     = 1 - rho_eff(0)
    x_l     = lambda(y_l)
    y_{l+1} = 1 - rho_eff(1 - x_l)

with ``rho_eff(x) = sum_i rho_eff_i x^(i-1)``.  A degree-``i`` worker emits
a non-erased message only if it finishes by ``t0``, so by default
``rho_eff_i = rho_i * F(t0 / i)``.  ``strict=True`` instead weights by the
straggling probability ``1 - F(t0 / i)``; it is kept for comparison only and
does not match simulation.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .degree import (DegreeDistribution, InvalidDistributionError, Perspective,
                     design_rate, node_to_edge)
from .timing import StragglerModel, straggler_probability, survival_probability

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 10_000


class NotConvergedError(RuntimeError):
    pass


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class EffectiveCheckDistribution:
    """Sub-stochastic edge-perspective generator weights."""

    coeffs: tuple[tuple[int, float], ...]

    @property
    def masses(self) -> dict[int, float]:
        return dict(self.coeffs)

    def __call__(self, x: float) -> float:
        return sum(c * x ** (i - 1) for i, c in self.coeffs)


@dataclass
class DeTrace:
    x_seq: list[float] = field(default_factory=list)
    y_seq: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def fixed_point(self) -> float:
        return self.x_seq[-1]

    @property
    def y_final(self) -> float:
        return self.y_seq[-1]

    def rows(self):
        """``(l, x_l, y_l)`` tuples with ``l`` starting at 1."""
        return [(l + 1, x, y) for l, (x, y) in enumerate(zip(self.x_seq, self.y_seq))]


def effective_rho(rho: DegreeDistribution, model: StragglerModel,
                  strict: bool = False) -> EffectiveCheckDistribution:
    if rho.perspective is not Perspective.EDGE_GENERATOR:
        raise InvalidDistributionError("effective_rho needs an edge-perspective generator distribution")
    weight = straggler_probability if strict else survival_probability
    return EffectiveCheckDistribution(tuple((i, r * weight(model, i)) for i, r in rho.coeffs))


def de_iterate(lam: DegreeDistribution, rho_eff: EffectiveCheckDistribution,
               max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL) -> DeTrace:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if lam.perspective is not Perspective.EDGE_VARIABLE:
        raise InvalidDistributionError("de_iterate needs an edge-perspective variable distribution")
    trace = DeTrace()
    y = 1.0 - rho_eff(0.0)
    x = lam(y)
    trace.x_seq.append(x)
    trace.y_seq.append(y)
    for _ in range(max_iters - 1):
        y = 1.0 - rho_eff(1.0 - x)
        x_new = lam(y)
        trace.x_seq.append(x_new)
        trace.y_seq.append(y)
        if abs(x_new - x) < tol:
            trace.converged = True
            break
        x = x_new
    return trace


def unrecovered_fraction(L: DegreeDistribution, trace: DeTrace) -> float:
    """Asymptotic fraction of chunks left unresolved, ``L(y_inf)``.

    A chunk of degree ``i`` stays unknown only if all ``i`` incoming
    generator messages are erasures.
    """
    if not trace.converged:
        raise NotConvergedError("density evolution did not converge")
    if L.perspective is not Perspective.NODE_VARIABLE:
        raise InvalidDistributionError("unrecovered_fraction needs a node-perspective variable distribution")
    return L(trace.y_final)


def predict_unrecovered(var_dist: DegreeDistribution, gen_dist: DegreeDistribution,
                        model: StragglerModel, strict: bool = False,
                        max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL) -> float:
    """DE prediction for node-perspective ``(L, R)`` under ``model``."""
    trace = de_iterate(node_to_edge(var_dist),
                       effective_rho(node_to_edge(gen_dist), model, strict),
                       max_iters, tol)
    return unrecovered_fraction(var_dist, trace)


@dataclass(frozen=True)
class SearchResult:
    distribution: DegreeDistribution
    fixed_point: float
    unrecovered: float
    rate: float
    candidates: int

    def to_dict(self) -> dict:
        return {
            "generator_distribution": self.distribution.to_dict(),
            "edge_distribution": node_to_edge(self.distribution).to_dict(),
            "fixed_point": self.fixed_point,
            "unrecovered_fraction": self.unrecovered,
            "rate": self.rate,
            "candidates": self.candidates,
        }


def _lattice(units: int, slots: int):
    """All ways to place ``units`` grid steps into ``slots`` degrees."""
    for cuts in itertools.combinations(range(units + slots - 1), slots - 1):
        prev, parts = -1, []
        for c in cuts + (units + slots - 1,):
            parts.append(c - prev - 1)
            prev = c
        yield parts


def search_distributions(rate: float, var_dist: DegreeDistribution, model: StragglerModel,
                         max_gen_degree: int = 4, grid_step: float = 0.25,
                         rate_tol: float = 1e-9, strict: bool = False) -> SearchResult:
    """Grid search for the generator distribution minimizing DE loss.

    Candidates are node-perspective ``R`` with masses on multiples of
    ``grid_step`` over degrees ``1..max_gen_degree`` whose design rate is
    within ``rate_tol`` of ``rate``.  Ties go to larger ``R_1``, then to the
    lexicographically larger mass vector.
    """
    if not 0 < rate <= 1:
        raise SearchError(f"rate must be in (0, 1], got {rate}")
    if grid_step <= 0:
        raise SearchError("grid_step must be positive")
    units = round(1.0 / grid_step)
    if abs(units * grid_step - 1.0) > 1e-9:
        raise SearchError(f"grid_step {grid_step} does not divide 1")

    lam = node_to_edge(var_dist)
    best = None
    count = 0
    for parts in _lattice(units, max_gen_degree):
        R = DegreeDistribution({i + 1: p / units for i, p in enumerate(parts) if p},
                               Perspective.NODE_GENERATOR, normalize=True)
        r = design_rate(var_dist, R)
        if abs(r - rate) > rate_tol:
            continue
        count += 1
        trace = de_iterate(lam, effective_rho(node_to_edge(R), model, strict))
        loss = unrecovered_fraction(var_dist, trace)
        key = (loss, -parts[0], tuple(-p for p in parts))
        if best is None or key < best[0]:
            best = (key, R, trace, r)
    if best is None:
        raise SearchError(f"no distribution on the {grid_step} grid reaches rate {rate}")
    key, R, trace, r = best
    return SearchResult(R, trace.fixed_point, key[0], r, count)


# Generator distributions found by the rate-1/2 search against L(x) = x^3.
REFERENCE_GEN_DISTS = {
    0.5: {1: 0.75, 3: 0.25},
    1.0: {1: 0.5, 2: 0.5},
    2.0: {1: 0.5, 2: 0.5},
}


def reference_gen_dist(mu: float) -> DegreeDistribution | None:
    for m, coeffs in REFERENCE_GEN_DISTS.items():
        if math.isclose(m, mu):
            return DegreeDistribution(coeffs, Perspective.NODE_GENERATOR)
    return None
