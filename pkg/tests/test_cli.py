import json
import subprocess
import sys
from pathlib import Path

import pytest

from bayesel.cli import EXIT_INIT, EXIT_INPUT, EXIT_OK, run

CONFIGS = Path(__file__).resolve().parent.parent / "demos" / "configs"


def _cfg(tmp_path, name, obj):
    p = tmp_path / f"{name}.json"
    p.write_text(json.dumps(obj))
    return str(p)


TOY = {"model": "normal_toy", "synthetic": {"n": 10, "seed": 7}, "length": 600,
       "burn_in": 100, "q1": {"scales": 0.5},
       "q2": {"kind": "truncated-normal-at-mcele", "scales": 0.5}}
SELECT = {"mode": "regression", "synthetic": {"seed": 1, "n": 80, "s": 3,
                                              "beta_true": [1.5, 0, 0], "sigma_true": 0.6},
          "length": 400, "burn_in": 100, "proposals": {"beta_sd": 0.05, "sigma2_sd": 0.1}}


def test_solve_el_uniform(capsys):
    assert run(["solve-el", "--config", str(CONFIGS / "solve_el.json")]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["feasible"] and doc["weights"] == pytest.approx([1 / 3] * 3, abs=1e-12)


def test_solve_el_infeasible(tmp_path, capsys):
    cfg = _cfg(tmp_path, "el", {"values": [[1], [2], [3]],
                                "constraints": {"type": "mean"}, "theta": [5]})
    assert run(["solve-el", "--config", cfg]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["feasible"] is False and doc["log_el"] == "-inf" and doc["weights"] is None


def test_unknown_key_is_input_error(tmp_path):
    cfg = _cfg(tmp_path, "bad", {**TOY, "lenght": 5})
    assert run(["sample", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INPUT


def test_missing_files(tmp_path):
    assert run(["sample", "--config", str(tmp_path / "nope.json")]) == EXIT_INPUT
    cfg = _cfg(tmp_path, "c", {**{k: v for k, v in TOY.items() if k != "synthetic"},
                               "data": "missing.csv"})
    assert run(["sample", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INPUT
    assert run(["diagnose", str(tmp_path / "none.csv")]) == EXIT_INPUT


def test_grid_rejects_other_models(tmp_path):
    cfg = _cfg(tmp_path, "g", {"model": "rats", "ranges": [[0, 1], [0, 1]], "resolution": 3})
    assert run(["grid", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INPUT


def test_infeasible_init_exit_code(tmp_path):
    cfg = _cfg(tmp_path, "i", {**TOY, "init": {"theta1": [50.0], "theta2": [1.0]}})
    assert run(["sample", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INIT


def test_bad_arguments(tmp_path):
    assert run(["frobnicate"]) == EXIT_INPUT
    cfg = _cfg(tmp_path, "t", TOY)
    assert run(["sample", "--config", cfg, "--chains", "0", "--out", str(tmp_path)]) == EXIT_INPUT
    bad = _cfg(tmp_path, "b", {**TOY, "burn_in": 600})
    assert run(["sample", "--config", bad, "--out", str(tmp_path)]) == EXIT_INPUT


def test_grid_output(tmp_path):
    cfg = _cfg(tmp_path, "g", {"model": "normal_toy", "synthetic": {"n": 10, "seed": 7},
                               "ranges": [[-3.0, 3.0], [-0.5, 2.0]], "resolution": 6})
    out = tmp_path / "o"
    assert run(["grid", "--config", cfg, "--out", str(out), "--no-plot"]) == EXIT_OK
    lines = (out / "grid.csv").read_text().splitlines()
    assert lines[0] == "theta1,theta2,log_post" and len(lines) == 37
    cells = [ln.split(",")[2] for ln in lines[1:]]
    assert "NA" in cells and any(c != "NA" for c in cells)
    assert not (out / "grid.svg").exists()
    assert run(["grid", "--config", cfg, "--out", str(out)]) == EXIT_OK
    assert (out / "grid.svg").read_text().startswith("<svg")


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(Path(d).iterdir()) if p.suffix != ".svg"}


@pytest.mark.parametrize("command,cfg", [("sample", TOY), ("select", SELECT)])
def test_reruns_are_byte_identical(tmp_path, command, cfg):
    c = _cfg(tmp_path, "c", cfg)
    for d in ("a", "b"):
        assert run([command, "--config", c, "--seed", "9", "--out", str(tmp_path / d)]) == EXIT_OK
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    assert a.keys() == b.keys() and a == b
    c2 = tmp_path / "c2"
    assert run([command, "--config", c, "--seed", "10", "--out", str(c2)]) == EXIT_OK
    trace = "trace.csv" if command == "sample" else "model_trace.csv"
    assert _files(c2)[trace] != a[trace]


def test_select_outputs(tmp_path):
    out = tmp_path / "o"
    assert run(["select", "--config", _cfg(tmp_path, "s", SELECT), "--out", str(out)]) == EXIT_OK
    freq = json.loads((out / "model_freq.json").read_text())
    assert sum(freq.values()) == pytest.approx(1.0)
    sel = json.loads((out / "selection.json").read_text())
    assert sel["modal_model"] == "100"


def test_chains_suffix(tmp_path):
    out = tmp_path / "o"
    cfg = _cfg(tmp_path, "t", TOY)
    assert run(["sample", "--config", cfg, "--chains", "2", "--out", str(out),
                "--no-plot"]) == EXIT_OK
    names = {p.name for p in out.iterdir()}
    assert {"trace_chain0.csv", "trace_chain1.csv", "summary_chain1.csv"} <= names
    assert (out / "trace_chain0.csv").read_bytes() != (out / "trace_chain1.csv").read_bytes()


def test_diagnose_both_formats(tmp_path, capsys):
    out = tmp_path / "o"
    assert run(["sample", "--config", _cfg(tmp_path, "t", TOY), "--out", str(out)]) == EXIT_OK
    assert run(["select", "--config", _cfg(tmp_path, "s", SELECT), "--out", str(out)]) == EXIT_OK
    capsys.readouterr()
    assert run(["diagnose", str(out / "trace.csv"), "--burn-in", "100"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "theta1_1" in text and "stationary=" in text
    d2 = tmp_path / "d2"
    assert run(["diagnose", str(out / "model_trace.csv"), "--out", str(d2)]) == EXIT_OK
    rep = json.loads((d2 / "diagnose.json").read_text())
    assert set(rep["acceptance"]["by_move_type"]) >= {"within"}
    assert (d2 / "diagnose_summary.csv").read_text().startswith("parameter,")


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "bayesel.cli", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "solve-el" in res.stdout
