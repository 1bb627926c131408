"""Degree distributions of LDGM code ensembles.

Node-perspective polynomials are ``L(x) = sum L_i x^i`` (variables) and
``R(x) = sum R_i x^i`` (generators).  Edge-perspective polynomials are
``lambda(x) = sum lambda_i x^(i-1)`` and ``rho(x) = sum rho_i x^(i-1)``.
All four are stored the same way: a sparse map from degree ``i`` to mass.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Mapping

MASS_TOL = 1e-12
DEFAULT_MAX_DEGREE = 1 << 16


class InvalidDistributionError(ValueError):
    """Raised for malformed degree distributions."""


class Perspective(str, enum.Enum):
    NODE_VARIABLE = "node_variable"
    EDGE_VARIABLE = "edge_variable"
    NODE_GENERATOR = "node_generator"
    EDGE_GENERATOR = "edge_generator"

    @property
    def is_node(self) -> bool:
        return self in (Perspective.NODE_VARIABLE, Perspective.NODE_GENERATOR)

    @property
    def is_variable(self) -> bool:
        return self in (Perspective.NODE_VARIABLE, Perspective.EDGE_VARIABLE)

    def flipped(self) -> "Perspective":
        return _FLIP[self]


_FLIP = {
    Perspective.NODE_VARIABLE: Perspective.EDGE_VARIABLE,
    Perspective.EDGE_VARIABLE: Perspective.NODE_VARIABLE,
    Perspective.NODE_GENERATOR: Perspective.EDGE_GENERATOR,
    Perspective.EDGE_GENERATOR: Perspective.NODE_GENERATOR,
}


@dataclass(frozen=True)
class DegreeDistribution:
    """Finite-support degree distribution.

    ``coeffs`` is kept as a sorted tuple of ``(degree, mass)`` pairs so the
    value is hashable and immutable; use :attr:`masses` for a dict view.
    Zero masses are dropped on construction.
    """

    coeffs: tuple[tuple[int, float], ...]
    perspective: Perspective
    max_degree: int = DEFAULT_MAX_DEGREE

    def __init__(
        self,
        coeffs: Mapping[int, float],
        perspective: Perspective | str,
        max_degree: int = DEFAULT_MAX_DEGREE,
        normalize: bool = False,
    ):
        perspective = Perspective(perspective)
        items = []
        for deg, mass in dict(coeffs).items():
            deg_i = int(deg)
            if deg_i != deg and not isinstance(deg, str):
                raise InvalidDistributionError(f"non-integer degree {deg!r}")
            mass = float(mass)
            if deg_i < 1:
                raise InvalidDistributionError(f"degree must be >= 1, got {deg_i}")
            if deg_i > max_degree:
                raise InvalidDistributionError(
                    f"degree {deg_i} exceeds max degree {max_degree}")
            if not mass >= 0.0:
                raise InvalidDistributionError(f"negative mass {mass} at degree {deg_i}")
            if mass > 0.0:
                items.append((deg_i, mass))
        total = sum(m for _, m in items)
        if total <= 0.0:
            raise InvalidDistributionError("distribution has no mass")
        if normalize:
            items = [(d, m / total) for d, m in items]
        elif abs(total - 1.0) > MASS_TOL:
            raise InvalidDistributionError(f"masses sum to {total!r}, not 1")
        object.__setattr__(self, "coeffs", tuple(sorted(items)))
        object.__setattr__(self, "perspective", perspective)
        object.__setattr__(self, "max_degree", int(max_degree))

    @property
    def masses(self) -> dict[int, float]:
        return dict(self.coeffs)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(d for d, _ in self.coeffs)

    def mass(self, degree: int) -> float:
        return self.masses.get(degree, 0.0)

    def is_regular(self) -> bool:
        return len(self.coeffs) == 1

    def __call__(self, x: float) -> float:
        """Evaluate the polynomial: ``sum m_i x^i`` (node) or ``x^(i-1)`` (edge)."""
        shift = 0 if self.perspective.is_node else 1
        return sum(m * x ** (d - shift) for d, m in self.coeffs)

    def to_dict(self) -> dict:
        return {
            "perspective": self.perspective.value,
            "coeffs": {str(d): m for d, m in self.coeffs},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, obj: Mapping) -> "DegreeDistribution":
        try:
            coeffs = {int(k): float(v) for k, v in obj["coeffs"].items()}
            perspective = Perspective(obj["perspective"])
        except (KeyError, ValueError, AttributeError, TypeError) as exc:
            raise InvalidDistributionError(f"bad distribution object: {exc}") from exc
        return cls(coeffs, perspective)

    @classmethod
    def from_json(cls, text: str) -> "DegreeDistribution":
        return cls.from_dict(json.loads(text))

    @classmethod
    def regular(cls, degree: int, perspective: Perspective | str) -> "DegreeDistribution":
        return cls({degree: 1.0}, perspective)


def _require(dist: DegreeDistribution, node: bool) -> None:
    if dist.perspective.is_node != node:
        want = "node" if node else "edge"
        raise InvalidDistributionError(
            f"expected a {want}-perspective distribution, got {dist.perspective.value}")


def node_to_edge(dist: DegreeDistribution) -> DegreeDistribution:
    """``lambda(x) = L'(x) / L'(1)``; the same map takes ``R`` to ``rho``."""
    _require(dist, node=True)
    mean = average_degree(dist)
    if mean <= 0.0:
        raise InvalidDistributionError("zero mean degree")
    return DegreeDistribution(
        {d: d * m / mean for d, m in dist.coeffs},
        dist.perspective.flipped(),
        dist.max_degree,
        normalize=True,
    )


def edge_to_node(dist: DegreeDistribution) -> DegreeDistribution:
    _require(dist, node=False)
    return DegreeDistribution(
        {d: m / d for d, m in dist.coeffs},
        dist.perspective.flipped(),
        dist.max_degree,
        normalize=True,
    )


def average_degree(dist: DegreeDistribution) -> float:
    _require(dist, node=True)
    return sum(d * m for d, m in dist.coeffs)


def design_rate(var_dist: DegreeDistribution, gen_dist: DegreeDistribution) -> float:
    """K/N implied by edge balance ``K * avg_var = N * avg_gen``."""
    avg_var = average_degree(var_dist)
    if avg_var <= 0.0:
        raise InvalidDistributionError("zero average variable degree")
    return average_degree(gen_dist) / avg_var
