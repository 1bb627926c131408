"""Plot-script generation for objective-vs-iteration and objective-vs-time.

The scripts are standalone (csv + matplotlib) and read the merged trace
CSVs written by ``simulate``; nothing here imports matplotlib.
"""
from __future__ import annotations

import csv
import re
from pathlib import Path

TRACE_GLOB = "trace_mu*.csv"
_MU_RE = re.compile(r"trace_mu(.+)\.csv$")

_TEMPLATE = '''\
"""Objective vs {xlabel} at mu={mu} (mean over seeds, min/max band)."""
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
TRACE = HERE / {trace!r}
OUT = HERE / {png!r}

runs = defaultdict(lambda: defaultdict(dict))
with open(TRACE, newline="", encoding="utf-8") as fh:
    for row in csv.DictReader(fh):
        it = int(row["iteration"])
        runs[row["scheme"]][it][int(row["seed"])] = (float(row["sim_time"]), float(row["objective"]))

fig, ax = plt.subplots(figsize=(5, 4))
for scheme in sorted(runs):
    its = sorted(runs[scheme])
    xs, mean, lo, hi = [], [], [], []
    for it in its:
        vals = list(runs[scheme][it].values())
        objs = [v[1] for v in vals]
        xs.append({xexpr})
        mean.append(sum(objs) / len(objs))
        lo.append(min(objs))
        hi.append(max(objs))
    line, = ax.plot(xs, mean, label=scheme)
    ax.fill_between(xs, lo, hi, color=line.get_color(), alpha=0.2)
ax.set_yscale("log")
ax.set_xlabel({xlabel!r})
ax.set_ylabel("objective")
ax.set_title("mu = {mu}")
ax.legend()
fig.tight_layout()
fig.savefig(OUT, dpi=150)
'''

_AXES = {
    "iteration": ("iteration", "it"),
    "time": ("simulated time", "sum(v[0] for v in vals) / len(vals)"),
}


class PlotError(RuntimeError):
    pass


def _check_trace(path: Path) -> None:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise PlotError(f"empty trace: {path}")


def emit_plots(trace_dir, out_dir=None) -> list[Path]:
    """Write two scripts per ``trace_mu*.csv`` found in ``trace_dir``."""
    trace_dir = Path(trace_dir)
    out_dir = Path(out_dir) if out_dir is not None else trace_dir
    traces = sorted(trace_dir.glob(TRACE_GLOB))
    if not traces:
        raise PlotError(f"no {TRACE_GLOB} files in {trace_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for trace in traces:
        _check_trace(trace)
        mu = _MU_RE.search(trace.name).group(1)
        rel = Path(*[".."] * _depth(out_dir, trace_dir), trace.name) if out_dir != trace_dir else Path(trace.name)
        for axis, (xlabel, xexpr) in _AXES.items():
            script = out_dir / f"plot_{axis}_mu{mu}.py"
            script.write_text(_TEMPLATE.format(
                xlabel=xlabel, mu=mu, trace=rel.as_posix(), png=f"objective_{axis}_mu{mu}.png",
                xexpr=xexpr), encoding="utf-8", newline="\n")
            written.append(script)
    return written


def _depth(out_dir: Path, trace_dir: Path) -> int:
    try:
        return len(out_dir.resolve().relative_to(trace_dir.resolve()).parts)
    except ValueError as exc:
        raise PlotError("plot output directory must live inside the trace directory") from exc
