import csv
import io
import json
import subprocess
import sys

import pytest

from ldgm_gc import cli
from ldgm_gc.config import DEFAULTS, ConfigError, parse_config, resolve
from ldgm_gc.experiment import SchemeKind
from ldgm_gc.graph import from_explicit_adjacency
from ldgm_gc.plots import PlotError, emit_plots

TINY = {"scale": "desk", "d": 4, "n": 240, "K": 12, "N": 24, "iterations": 3, "seeds": 2}


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_empty_config_defaults(tmp_path):
    groups = parse_config(write(tmp_path, {}))
    assert [g.mu for g in groups] == [0.5, 1.0, 2.0]
    g = groups[0]
    assert (g.n, g.d) == (1200, 12000)
    assert len(g.seeds) == DEFAULTS["seeds"]
    kinds = {c.kind for c in g.schemes}
    assert kinds == set(SchemeKind)
    for c in g.schemes:
        assert (c.model.t0, c.eta0, c.iterations, c.N, c.K) == (1.0, 0.1, 100, 240, 120)
    ldgm = next(c for c in g.schemes if c.kind is SchemeKind.LDGM_SGD)
    assert ldgm.code.gen_dist.masses == {1: 0.75, 3: 0.25}
    ldgm2 = next(c for c in groups[2].schemes if c.kind is SchemeKind.LDGM_SGD)
    assert ldgm2.code.gen_dist.masses == {1: 0.5, 2: 0.5}


@pytest.mark.parametrize("raw, key", [
    ({"colour": 1}, "colour"),
    ({"mu": -1}, "mu"),
    ({"K": 7}, "K"),
    ({"seeds": 0}, "seeds"),
    ({"var_dist": {"3": 0.5}}, "var_dist"),
    ({"normalize": "median"}, "normalize"),
    ({"schemes": ["sgd"]}, "schemes"),
    ({"gen_dist": {"1": 0.5, "2": 0.25}}, "gen_dist"),
])
def test_errors_name_key(raw, key):
    with pytest.raises(ConfigError, match=f"^{key}:"):
        resolve(raw)


def test_mu_list_groups():
    assert len(resolve({"mu": [0.5, 1.0, 2.0], "schemes": "uncoded_sgd"})) == 3
    assert len(resolve({"mu": 2.0, "schemes": "uncoded_sgd"})) == 1


def test_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "missing.json")
    with pytest.raises(ConfigError, match="malformed"):
        parse_config(write(tmp_path, "{oops"))


def test_gen_dist_per_mu_and_fixed_graph(tmp_path):
    groups = resolve({**TINY, "mu": [1.0], "gen_dist": {"1.0": {"1": 0.5, "2": 0.5}}})
    assert groups[0].schemes[2].code.gen_dist.masses == {1: 0.5, 2: 0.5}
    g = from_explicit_adjacency(12, 24, [[j % 12] for j in range(24)])
    (tmp_path / "g.json").write_text(g.to_json())
    groups = parse_config(write(tmp_path, {**TINY, "graph": "g.json", "schemes": ["ldgm_sgd"]}))
    assert groups[0].schemes[0].fixed_graph == g


def test_exit_codes(tmp_path, capsys):
    code, _, err = run_cli(capsys, "simulate", "--config", str(write(tmp_path, {"bad": 1})))
    assert code == 2 and err.startswith("config-error: bad:") and err.count("\n") == 1
    code, _, err = run_cli(capsys, "simulate", "--config", str(tmp_path / "nope.json"))
    assert code == 2 and err.startswith("config-error:")
    code, _, err = run_cli(capsys, "plot", "--traces", str(tmp_path / "empty"))
    assert code == 3 and err.startswith("runtime-error:") and err.count("\n") == 1


def test_expected_wait_cli(capsys):
    code, out, _ = run_cli(capsys, "expected-wait", "--w", "1", "--N", "240", "--K", "120")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [round(float(r["expected_wait"]), 3) for r in rows] == [12.112, 6.056, 3.028]


def test_search_cli(capsys):
    code, out, _ = run_cli(capsys, "search", "--mu", "0.5", "2.0")
    res = json.loads(out)
    assert code == 0
    assert res[0]["generator_distribution"]["coeffs"] == {"1": 0.75, "3": 0.25}
    assert res[1]["generator_distribution"]["coeffs"] == {"1": 0.5, "2": 0.5}


def test_de_cli(capsys):
    code, out, err = run_cli(capsys, "de", "--mu", "1", "--gen", "1:0.5,2:0.5")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["l", "x_l", "y_l"]
    assert float(rows[-1][1]) == pytest.approx(0.3989596236663784, abs=1e-8)
    assert "unrecovered_fraction=" in err


def test_simulate_and_plot(tmp_path, capsys):
    cfg = write(tmp_path, TINY)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli(capsys, "simulate", "--config", str(cfg), "--out", str(out1))[0] == 0
    assert run_cli(capsys, "simulate", "--config", str(cfg), "--out", str(out2), "--threads", "2")[0] == 0
    for name in ("trace_mu0.5.csv", "trace_mu1.csv", "trace_mu2.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    rows = list(csv.DictReader(open(out1 / "trace_mu1.csv")))
    assert len(rows) == 3 * 2 * 4
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert manifest["config_hash"] == json.loads((out2 / "manifest.json").read_text())["config_hash"]

    scripts = emit_plots(out1, out1 / "plots")
    assert len(scripts) == 6
    before = [p.read_bytes() for p in scripts]
    emit_plots(out1, out1 / "plots")
    assert [p.read_bytes() for p in scripts] == before


def test_plot_script_runs_single_seed(tmp_path, capsys, monkeypatch):
    pytest.importorskip("matplotlib")
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env_out"))
    cfg = write(tmp_path, {**TINY, "mu": [1.0], "seeds": [5]})
    assert run_cli(capsys, "simulate", "--config", str(cfg))[0] == 0
    assert run_cli(capsys, "plot")[0] == 0
    script = tmp_path / "env_out" / "plots" / "plot_time_mu1.py"
    subprocess.run([sys.executable, str(script)], check=True)
    assert (tmp_path / "env_out" / "plots" / "objective_time_mu1.png").exists()


def test_plot_rejects_empty_trace(tmp_path):
    (tmp_path / "trace_mu1.csv").write_text("")
    with pytest.raises(PlotError, match="empty"):
        emit_plots(tmp_path)
