"""Command-line front end.

Subcommands: ``simulate``, ``de``, ``search``, ``expected-wait``, ``plot``.
Exit status is 0 on success, 2 for configuration errors and 3 for runtime
errors; failures print one ``config-error: ...`` or ``runtime-error: ...``
line on stderr.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import functools
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .config import ConfigError, RunGroup, load_raw, resolve
from .de import de_iterate, effective_rho, search_distributions, unrecovered_fraction
from .degree import DegreeDistribution, InvalidDistributionError, Perspective, node_to_edge
from .experiment import SchemeConfig, expected_wait_rs, run_experiment, traces_to_csv
from .learning import generate_dataset
from .plots import emit_plots
from .timing import StragglerModel

OUT_ENV = "LDGM_GC_OUT"
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("ldgm_gc")


def data_seed(seed: int) -> list[int]:
    return [int(seed), 0xDA7A, 0]


@functools.lru_cache(maxsize=4)
def _dataset(n: int, d: int, K: int, seed: int):
    return generate_dataset(n, d, K, data_seed(seed))[0]


def _run_job(job: tuple[int, int, SchemeConfig]) -> str:
    n, d, config = job
    trace = run_experiment(config, _dataset(n, d, config.K, config.seed))
    return traces_to_csv([trace])


def _mu_tag(mu: float) -> str:
    return f"{mu:g}"


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _merge(parts: list[str]) -> str:
    header, *_ = parts[0].split("\n", 1)
    body = "".join(p.split("\n", 1)[1] for p in parts)
    return header + "\n" + body


def plan_hash(groups: list[RunGroup]) -> str:
    h = hashlib.sha256()
    for g in groups:
        h.update(f"{g.mu!r}|{g.n}|{g.d}\n".encode())
        for c in g.schemes:
            h.update(c.config_hash().encode())
    return h.hexdigest()[:16]


def simulate(groups: list[RunGroup], out: Path, threads: int = 1,
             config_path: str | None = None) -> list[Path]:
    """Run every scheme/seed of every group and write the trace CSVs."""
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(g.n, g.d, c) for g in groups for c in g.schemes]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]

    merged = []
    pos = 0
    for g in groups:
        parts = []
        for c in g.schemes:
            text = results[pos]
            pos += 1
            _write(runs_dir / f"{c.kind.value}_mu{_mu_tag(g.mu)}_seed{c.seed}.csv", text)
            parts.append(text)
        path = out / f"trace_mu{_mu_tag(g.mu)}.csv"
        _write(path, _merge(parts))
        merged.append(path)

    manifest = {
        "config_path": config_path,
        "config_hash": plan_hash(groups),
        "output_dir": str(out),
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "runs": [{"mu": g.mu, "n": g.n, "d": g.d,
                  "schemes": [c.to_dict() | {"hash": c.config_hash()} for c in g.schemes]}
                 for g in groups],
    }
    _write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return merged


def _parse_coeffs(text: str, perspective: Perspective) -> DegreeDistribution:
    """``"1:0.5,2:0.5"`` or a JSON object into a distribution."""
    try:
        if text.lstrip().startswith("{"):
            coeffs = {int(k): float(v) for k, v in json.loads(text).items()}
        else:
            coeffs = {}
            for item in text.split(","):
                deg, mass = item.split(":")
                coeffs[int(deg)] = float(mass)
        return DegreeDistribution(coeffs, perspective)
    except (ValueError, InvalidDistributionError) as exc:
        raise ConfigError(f"distribution {text!r}: {exc}") from exc


def _model(mu: float, t0: float) -> StragglerModel:
    try:
        return StragglerModel(mu=mu, t0=t0)
    except ValueError as exc:
        raise ConfigError(f"mu/t0: {exc}") from exc


def cmd_simulate(args) -> None:
    raw = load_raw(args.config) if args.config else {}
    if not isinstance(raw, dict):
        raise ConfigError("<root>: expected a JSON object")
    if args.seeds is not None:
        raw["seeds"] = args.seeds
    if args.strict_paper_de:
        raw["strict_de"] = True
    if args.strict_paper_wait:
        raw["strict_wait"] = True
    base = Path(args.config).parent if args.config else None
    groups = resolve(raw, base_dir=base)
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    for path in simulate(groups, out, args.threads, args.config):
        print(path)


def cmd_de(args) -> None:
    L = _parse_coeffs(args.var, Perspective.NODE_VARIABLE)
    R = _parse_coeffs(args.gen, Perspective.NODE_GENERATOR)
    model = _model(args.mu, args.t0)
    trace = de_iterate(node_to_edge(L), effective_rho(node_to_edge(R), model, args.strict_paper_de),
                       args.max_iters, args.tol)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["l", "x_l", "y_l"])
    for row in trace.rows():
        writer.writerow([row[0], repr(row[1]), repr(row[2])])
    if trace.converged:
        print(f"unrecovered_fraction={unrecovered_fraction(L, trace)!r}", file=sys.stderr)
    else:
        print("warning: not converged", file=sys.stderr)


def cmd_search(args) -> None:
    L = _parse_coeffs(args.var, Perspective.NODE_VARIABLE)
    results = []
    for mu in args.mu:
        try:
            res = search_distributions(args.rate, L, _model(mu, args.t0), args.max_gen_degree,
                                       args.grid_step, args.rate_tol, args.strict_paper_de)
        except ValueError as exc:
            raise ConfigError(f"search: {exc}") from exc
        results.append({"mu": mu} | res.to_dict())
    json.dump(results, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_expected_wait(args) -> None:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["mu", "w", "N", "K", "expected_wait"])
    for mu in args.mu:
        try:
            value = expected_wait_rs(args.w, mu, args.N, args.K, args.strict_paper_wait)
        except ValueError as exc:
            raise ConfigError(f"expected-wait: {exc}") from exc
        writer.writerow([f"{mu:g}", args.w, args.N, args.K, f"{value:.6f}"])


def cmd_plot(args) -> None:
    trace_dir = Path(args.traces or args.out or os.environ.get(OUT_ENV) or "out")
    out_dir = Path(args.plot_dir) if args.plot_dir else trace_dir / "plots"
    for path in emit_plots(trace_dir, out_dir):
        print(path)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ldgm-gc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run experiments from a JSON config")
    s.add_argument("--config", help="JSON config file (defaults used when omitted)")
    s.add_argument("--out", help=f"output directory (or ${OUT_ENV}; default ./out)")
    s.add_argument("--seeds", type=int, help="override the number of seeds")
    s.add_argument("--threads", type=int, default=1, help="worker processes")
    s.add_argument("--strict-paper-de", action="store_true",
                   help="search codes with the straggling-weighted DE")
    s.add_argument("--strict-paper-wait", action="store_true",
                   help="use the mu/w prefactor for the baseline wait")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("de", help="density-evolution trace as CSV (l, x_l, y_l)")
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--t0", type=float, default=1.0)
    s.add_argument("--var", default="3:1", help="node-perspective L, e.g. 3:1")
    s.add_argument("--gen", default="1:0.5,2:0.5", help="node-perspective R, e.g. 1:0.5,2:0.5")
    s.add_argument("--max-iters", type=int, default=10_000)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--strict-paper-de", action="store_true")
    s.set_defaults(func=cmd_de)

    s = sub.add_parser("search", help="grid search for a generator distribution (JSON)")
    s.add_argument("--mu", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    s.add_argument("--t0", type=float, default=1.0)
    s.add_argument("--rate", type=float, default=0.5)
    s.add_argument("--var", default="3:1")
    s.add_argument("--max-gen-degree", type=int, default=4)
    s.add_argument("--grid-step", type=float, default=0.25)
    s.add_argument("--rate-tol", type=float, default=1e-9)
    s.add_argument("--strict-paper-de", action="store_true")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("expected-wait", help="baseline expected wait per iteration (CSV)")
    s.add_argument("--mu", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    s.add_argument("--w", type=int, default=1)
    s.add_argument("--N", type=int, default=240)
    s.add_argument("--K", type=int, default=120)
    s.add_argument("--strict-paper-wait", action="store_true")
    s.set_defaults(func=cmd_expected_wait)

    s = sub.add_parser("plot", help="emit plot scripts from trace CSVs")
    s.add_argument("--traces", help="directory holding trace_mu*.csv")
    s.add_argument("--out", help="alias for --traces")
    s.add_argument("--plot-dir", help="where to write scripts (default <traces>/plots)")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("config-error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config-error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - top-level boundary
        print(f"runtime-error: {type(exc).__name__}: {_one_line(exc)}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


def _one_line(exc: BaseException) -> str:
    return " ".join(str(exc).split())


if __name__ == "__main__":
    sys.exit(main())
