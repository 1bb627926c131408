"""Experiment configuration files.

A config is a JSON object; every key is optional.  ``mu`` may be a number
or a list, and each value becomes one run group holding every requested
scheme for every seed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .de import search_distributions
from .degree import DegreeDistribution, InvalidDistributionError, Perspective
from .experiment import SchemeConfig, SchemeKind, graph_seed
from .graph import EnsembleSpec, GraphConstructionError, TannerGraph
from .timing import StragglerModel

SCALES = {"full": {"n": 1200, "d": 12000}, "desk": {"n": 1200, "d": 100}}

DEFAULTS = {
    "schemes": [k.value for k in SchemeKind],
    "mu": [0.5, 1.0, 2.0],
    "t0": 1.0,
    "base_cdf": "exponential",
    "eta0": 0.1,
    "iterations": 100,
    "seeds": 10,
    "scale": "full",
    "n": None,
    "d": None,
    "K": 120,
    "N": 240,
    "var_dist": {"3": 1.0},
    "gen_dist": "auto",
    "w": 1,
    "normalize": "mean",
    "resample_graph": False,
    "strict_wait": False,
    "strict_de": False,
    "graph": None,
}


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key."""


@dataclass
class RunGroup:
    mu: float
    n: int
    d: int
    schemes: list[SchemeConfig] = field(default_factory=list)

    @property
    def seeds(self) -> list[int]:
        return sorted({c.seed for c in self.schemes})


def _num(key, value, positive=True, integer=False):
    ok = isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
    if integer:
        ok = ok and float(value).is_integer()
    if not ok or (positive and value <= 0):
        kind = "positive " if positive else ""
        kind += "integer" if integer else "number"
        raise ConfigError(f"{key}: expected a {kind}, got {value!r}")
    return int(value) if integer else float(value)


def _dist(key, value, perspective) -> DegreeDistribution:
    if not isinstance(value, dict):
        raise ConfigError(f"{key}: expected a degree->mass object, got {value!r}")
    try:
        return DegreeDistribution({int(k): float(v) for k, v in value.items()}, perspective)
    except (InvalidDistributionError, ValueError, TypeError) as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def resolve(raw: dict, base_dir: Path | None = None) -> list[RunGroup]:
    """Fill defaults, validate, and expand a raw config into run groups."""
    if not isinstance(raw, dict):
        raise ConfigError(f"<root>: expected a JSON object, got {type(raw).__name__}")
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    cfg = {**DEFAULTS, **raw}

    schemes = cfg["schemes"]
    if isinstance(schemes, str):
        schemes = [schemes]
    try:
        kinds = [SchemeKind(s) for s in schemes]
    except ValueError as exc:
        raise ConfigError(f"schemes: {exc}") from exc
    mus = cfg["mu"] if isinstance(cfg["mu"], list) else [cfg["mu"]]
    if not mus:
        raise ConfigError("mu: empty list")
    mus = [_num("mu", m) for m in mus]
    if cfg["scale"] not in SCALES:
        raise ConfigError(f"scale: expected one of {sorted(SCALES)}, got {cfg['scale']!r}")
    n = _num("n", cfg["n"] if cfg["n"] is not None else SCALES[cfg["scale"]]["n"], integer=True)
    d = _num("d", cfg["d"] if cfg["d"] is not None else SCALES[cfg["scale"]]["d"], integer=True)
    K = _num("K", cfg["K"], integer=True)
    N = _num("N", cfg["N"], integer=True)
    if n % K:
        raise ConfigError(f"K: {K} does not divide n={n}")
    if SchemeKind.UNCODED_SGD in kinds and n % N:
        raise ConfigError(f"N: {N} does not divide n={n}")
    seeds = cfg["seeds"]
    if isinstance(seeds, list):
        seeds = [_num("seeds", s, positive=False, integer=True) for s in seeds]
        if not seeds or min(seeds) < 0 or len(set(seeds)) != len(seeds):
            raise ConfigError(f"seeds: expected distinct non-negative integers, got {seeds!r}")
    else:
        seeds = list(range(_num("seeds", seeds, integer=True)))
    t0 = _num("t0", cfg["t0"])
    eta0 = _num("eta0", cfg["eta0"])
    iterations = _num("iterations", cfg["iterations"], positive=False, integer=True)
    if iterations < 0:
        raise ConfigError(f"iterations: must be >= 0, got {iterations}")
    w = _num("w", cfg["w"], integer=True)
    if w > K:
        raise ConfigError(f"w: must be <= K={K}, got {w}")
    if cfg["normalize"] not in ("mean", "sum"):
        raise ConfigError(f"normalize: expected 'mean' or 'sum', got {cfg['normalize']!r}")
    if cfg["base_cdf"] != "exponential":
        raise ConfigError(f"base_cdf: only 'exponential' is supported, got {cfg['base_cdf']!r}")
    for key in ("resample_graph", "strict_wait", "strict_de"):
        if not isinstance(cfg[key], bool):
            raise ConfigError(f"{key}: expected true/false, got {cfg[key]!r}")
    var_dist = _dist("var_dist", cfg["var_dist"], Perspective.NODE_VARIABLE)

    fixed_graph = None
    if cfg["graph"] is not None:
        path = Path(cfg["graph"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            fixed_graph = TannerGraph.from_json(path.read_text())
        except (OSError, ValueError, GraphConstructionError) as exc:
            raise ConfigError(f"graph: {exc}") from exc
        if (fixed_graph.K, fixed_graph.N) != (K, N):
            raise ConfigError(f"graph: has K={fixed_graph.K}, N={fixed_graph.N}; config has K={K}, N={N}")

    groups = []
    for mu in mus:
        try:
            model = StragglerModel(mu=mu, t0=t0)
        except ValueError as exc:
            raise ConfigError(f"mu: {exc}") from exc
        gen_dist = None
        if SchemeKind.LDGM_SGD in kinds and fixed_graph is None:
            gen_dist = _gen_dist_for(cfg["gen_dist"], mu, K / N, var_dist, model, cfg["strict_de"])
        group = RunGroup(mu, n, d)
        for kind in kinds:
            for seed in seeds:
                common = dict(N=N, K=K, eta0=eta0, iterations=iterations, seed=seed,
                              normalize=cfg["normalize"])
                if kind is SchemeKind.LDGM_SGD:
                    code = None
                    if fixed_graph is None:
                        code = EnsembleSpec(K, N, var_dist, gen_dist, graph_seed(seed))
                    sc = SchemeConfig(kind, model, code=code, fixed_graph=fixed_graph,
                                      resample_graph=cfg["resample_graph"], **common)
                elif kind is SchemeKind.GC_BASELINE:
                    sc = SchemeConfig(kind, model, w=w, strict_wait=cfg["strict_wait"], **common)
                else:
                    sc = SchemeConfig(kind, model, **common)
                group.schemes.append(sc)
        groups.append(group)
    return groups


def _gen_dist_for(value, mu, rate, var_dist, model, strict) -> DegreeDistribution:
    if value == "auto":
        try:
            return search_distributions(rate, var_dist, model, strict=strict).distribution
        except ValueError as exc:
            raise ConfigError(f"gen_dist: {exc}") from exc
    if isinstance(value, dict) and value and all(isinstance(v, dict) for v in value.values()):
        for key, coeffs in value.items():
            if math.isclose(float(key), mu):
                return _dist("gen_dist", coeffs, Perspective.NODE_GENERATOR)
        raise ConfigError(f"gen_dist: no entry for mu={mu}")
    return _dist("gen_dist", value, Perspective.NODE_GENERATOR)


def load_raw(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError(f"config: file not found: {path}") from exc
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: malformed JSON at line {exc.lineno}: {exc.msg}") from exc


def parse_config(path) -> list[RunGroup]:
    return resolve(load_raw(path), base_dir=Path(path).parent)
