"""Command-line front end.

Every run is described by one JSON config; ``--seed``, ``--out`` and
``--chains`` override or complement it.  Configs are validated before any
computation and unknown keys are rejected.

Exit codes: 0 success, 2 input error, 3 infeasible initial state,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import applications as apps
from . import diagnostics as diag
from . import modelselect as ms
from .elcore import solve_el
from .errors import (BayesELError, DimensionError, EmptyTrace, InitInfeasible,
                     NonFiniteError, TooShort)
from .estimating import ThetaSplit, log_posterior_unnorm, read_observations
from .sampler import (Proposal1, Proposal2, chain_rng, read_trace_csv, two_step_mh,
                      write_trace_csv)
from .svg import grid_svg, trace_svg

EXIT_OK, EXIT_INPUT, EXIT_INIT, EXIT_NUMERIC = 0, 2, 3, 4


class InputError(Exception):
    """Malformed config or input file."""


# ---------------------------------------------------------------------------
# Config schemas

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_INT = {"type": "integer", "minimum": 0}
_NUMS = {"type": "array", "items": _NUM}
_SCALES = {"oneOf": [_POS, {"type": "array", "items": _POS, "minItems": 1}]}
_COLUMN = {"oneOf": [_INT, {"type": "string"}]}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_SYNTH_SAMPLE = _obj({"n": {"type": "integer", "minimum": 3}, "mean": _NUM, "sd": _POS,
                      "seed": _INT}, ["n"])
_TOY_PRIORS = _obj({"prior_mean_var": _POS, "ig_shape": _POS, "ig_scale": _POS})

SCHEMAS = {
    "solve-el": _obj({
        "data": {"type": "string"},
        "values": {"type": "array", "items": _NUMS},
        "constraints": _obj({
            "type": {"enum": ["columns", "mean", "mean_variance", "regression"]},
            "columns": {"type": "array", "items": _INT},
            "column": _INT,
            "response": _INT,
            "covariates": {"type": "array", "items": _INT},
            "gamma": {"type": "array", "items": {"enum": [0, 1]}},
        }, ["type"]),
        "theta": _NUMS,
        "seed": _INT,
    }, ["constraints"]),
    "grid": _obj({
        "model": {"type": "string"},
        "data": {"type": "string"},
        "column": _INT,
        "synthetic": _SYNTH_SAMPLE,
        "priors": _TOY_PRIORS,
        "ranges": {"type": "array", "items": {"type": "array", "items": _NUM,
                                              "minItems": 2, "maxItems": 2},
                   "minItems": 2, "maxItems": 2},
        "resolution": {"type": "integer", "minimum": 2},
        "seed": _INT,
    }, ["model", "ranges", "resolution"]),
    "sample": _obj({
        "model": {"enum": ["normal_toy", "rats"]},
        "data": {"type": "string"},
        "column": _INT,
        "synthetic": _SYNTH_SAMPLE,
        "priors": _TOY_PRIORS,
        "length": {"type": "integer", "minimum": 1},
        "burn_in": _INT,
        "q1": _obj({"kind": {"enum": ["gaussian-random-walk"]}, "scales": _SCALES}),
        "q2": _obj({"kind": {"enum": ["gaussian-at-mcele", "truncated-normal-at-mcele"]},
                    "scales": _SCALES, "bounds": _NUMS}),
        "chains": {"type": "integer", "minimum": 1},
        "init": _obj({"theta1": _NUMS, "theta2": _NUMS}, ["theta1", "theta2"]),
        "scan": {"enum": ["per-rat", "joint"]},
        "engine": {"enum": ["compiled", "generic"]},
        "seed": _INT,
    }, ["model", "length"]),
    "select": _obj({
        "mode": {"enum": ["regression", "dag"]},
        "data": {"type": "string"},
        "response": _COLUMN,
        "covariates": {"type": "array", "items": _COLUMN},
        "standardize": {"type": "boolean"},
        "synthetic": _obj({"seed": _INT, "n": {"type": "integer", "minimum": 2},
                           "s": {"type": "integer", "minimum": 1}, "beta_true": _NUMS,
                           "sigma_true": _POS, "nodes": {"type": "integer", "minimum": 2},
                           "roots": {"type": "integer", "minimum": 1}}),
        "roots": {"type": "integer", "minimum": 1},
        "nodes": {"type": "array", "items": {"type": "string"}},
        "length": {"type": "integer", "minimum": 1},
        "burn_in": _INT,
        "priors": _obj({"lambda_shape": _POS, "lambda_scale": _POS, "sigma2_shape": _POS,
                        "sigma2_scale": _POS, "model_a": _POS, "model_b": _POS}),
        "proposals": _obj({"beta_sd": _POS, "sigma2_sd": _POS, "u_sd": _POS,
                           "within": {"enum": ["random-walk", "ols-centered"]}}),
        "chains": {"type": "integer", "minimum": 1},
        "seed": _INT,
    }, ["mode", "length"]),
    "diagnose": _obj({
        "trace": {"type": "string"},
        "burn_in": _INT,
        "columns": {"type": "array", "items": {"type": "string"}},
        "alpha": _POS,
        "eps": _POS,
        "seed": _INT,
    }, ["trace"]),
}


def load_config(command: str, path: Optional[str], extra: Optional[dict] = None) -> dict:
    cfg: dict = {}
    if path is not None:
        try:
            cfg = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {path}: {exc}") from None
        if not isinstance(cfg, dict):
            raise InputError("config must be a JSON object")
        base = Path(path).resolve().parent
        for key in ("data", "trace"):
            if isinstance(cfg.get(key), str) and not Path(cfg[key]).is_absolute():
                cfg[key] = str(base / cfg[key])
    cfg.update(extra or {})
    try:
        jsonschema.validate(cfg, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"invalid config at {where}: {exc.message}") from None
    return cfg


# ---------------------------------------------------------------------------
# Helpers


def _json_float(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def _read(path: str) -> tuple[np.ndarray, Optional[list[str]]]:
    try:
        return read_observations(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _sample_data(cfg: dict) -> np.ndarray:
    if "data" in cfg and "synthetic" in cfg:
        raise InputError("give either data or synthetic, not both")
    if "data" in cfg:
        data, _ = _read(cfg["data"])
        col = cfg.get("column", 0)
        if col >= data.shape[1]:
            raise InputError(f"column {col} out of range")
        return data[:, col]
    if "synthetic" in cfg:
        s = cfg["synthetic"]
        rng = np.random.default_rng(s.get("seed", 0))
        return rng.normal(s.get("mean", 0.0), s.get("sd", 1.0), s["n"])
    raise InputError("normal_toy needs data or synthetic")


def _toy(cfg: dict):
    return apps.normal_toy_model(_sample_data(cfg), **cfg.get("priors", {}))


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2) + "\n")
    return path


def _suffix(chain: int, chains: int) -> str:
    return "" if chains == 1 else f"_chain{chain}"


def _map_chains(fn, jobs: list, chains: int):
    workers = min(chains, os.cpu_count() or 1)
    if workers <= 1:
        return [fn(*j) for j in jobs]
    with ProcessPoolExecutor(workers) as ex:
        return list(ex.map(fn, *zip(*jobs)))


# ---------------------------------------------------------------------------
# solve-el


def _el_matrix(cfg: dict) -> np.ndarray:
    if "values" in cfg:
        data = np.asarray(cfg["values"], dtype=float)
        if data.ndim != 2:
            raise InputError("values must be a list of equal-length rows")
    elif "data" in cfg:
        data, _ = _read(cfg["data"])
    else:
        raise InputError("solve-el needs data or values")
    spec = cfg["constraints"]
    theta = np.asarray(cfg.get("theta", []), dtype=float)
    kind = spec["type"]
    v = data.shape[1]

    def col(c):
        if c >= v:
            raise InputError(f"column {c} out of range")
        return data[:, c]

    if kind == "columns":
        cols = spec.get("columns", list(range(v)))
        return np.column_stack([col(c) for c in cols]) if cols else np.zeros((data.shape[0], 0))
    if kind == "mean":
        if theta.size != 1:
            raise InputError("mean constraints need theta = [mu]")
        return (col(spec.get("column", 0)) - theta[0])[:, None]
    if kind == "mean_variance":
        if theta.size != 2:
            raise InputError("mean_variance constraints need theta = [mu, sigma2]")
        d = col(spec.get("column", 0)) - theta[0]
        return np.column_stack([d, d * d - theta[1]])
    # regression: theta = beta for the included covariates, then sigma2
    covs = spec.get("covariates")
    if covs is None or "response" not in spec:
        raise InputError("regression constraints need response and covariates")
    gamma = np.asarray(spec.get("gamma", [1] * len(covs)), dtype=bool)
    if gamma.size != len(covs) or theta.size != gamma.sum() + 1:
        raise InputError("theta must hold one beta per included covariate plus sigma2")
    rd = ms.RegressionData(col(spec["response"]), np.column_stack([col(c) for c in covs]))
    return ms.build_ms_constraints(rd, gamma, theta[:-1], theta[-1])


def cmd_solve_el(cfg: dict, out: Optional[Path]) -> int:
    sol = solve_el(_el_matrix(cfg))
    doc = {
        "feasible": bool(sol.feasible),
        "log_el": _json_float(sol.log_el),
        "weights": None if sol.weights is None else [float(w) for w in sol.weights],
        "multipliers": [_json_float(float(m)) for m in np.atleast_1d(sol.multipliers)],
        "iterations": int(sol.iterations),
        "grad_norm": _json_float(float(sol.grad_norm)),
    }
    text = json.dumps(doc, indent=2)
    print(text)
    if out is not None:
        (out / "solve_el.json").write_text(text + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# grid


def cmd_grid(cfg: dict, out: Path, plot: bool) -> int:
    if cfg["model"] != "normal_toy":
        raise InputError(f"grid needs a two-parameter model; {cfg['model']!r} is not one")
    model = _toy(cfg)
    (a0, a1), (b0, b1) = cfg["ranges"]
    res = cfg["resolution"]
    xs, ys = np.linspace(a0, a1, res), np.linspace(b0, b1, res)
    vals = np.full((res, res), -np.inf)
    with (out / "grid.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta1", "theta2", "log_post"])
        for i, a in enumerate(xs):
            for j, b in enumerate(ys):
                lp = -np.inf
                if b > 0:
                    lp = log_posterior_unnorm(model, ThetaSplit([a], [b]))
                vals[i, j] = lp
                w.writerow([repr(float(a)), repr(float(b)),
                            repr(float(lp)) if np.isfinite(lp) else "NA"])
    if plot:
        grid_svg(xs, ys, vals, out / "grid.svg", "mu", "sigma2")
    print(f"wrote {out / 'grid.csv'} ({res * res} cells, "
          f"{int(np.isfinite(vals).sum())} feasible)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sample


def _run_sample_chain(cfg: dict, seed: int, chain: int):
    rng = chain_rng(seed, chain)
    burn = cfg.get("burn_in", 0)
    q1cfg, q2cfg = cfg.get("q1", {}), cfg.get("q2", {})
    if cfg["model"] == "rats":
        kw = {}
        if "scales" in q1cfg:
            sd = q1cfg["scales"]
            if isinstance(sd, list):
                if len(sd) != 2:
                    raise InputError("rats q1 scales are [intercept_sd, slope_sd]")
                kw["intercept_sd"], kw["slope_sd"] = sd
            else:
                kw["intercept_sd"] = kw["slope_sd"] = sd
        if q2cfg.get("kind", "truncated-normal-at-mcele") != "truncated-normal-at-mcele":
            raise InputError("the rats error variance uses the truncated normal proposal")
        if "scales" in q2cfg:
            sd = q2cfg["scales"]
            kw["sigma2_sd"] = sd[0] if isinstance(sd, list) else sd
        return apps.run_rat_chain(cfg["length"], seed, burn_in=burn, rng=rng,
                                  engine=cfg.get("engine", "compiled"),
                                  scan=cfg.get("scan", "per-rat"), **kw)
    model = _toy(cfg)
    x = model.data[:, 0]
    init = cfg.get("init", {"theta1": [float(x.mean())], "theta2": [float(x.var())]})
    q1 = Proposal1(q1cfg.get("scales", 0.5))
    kind = q2cfg.get("kind", "truncated-normal-at-mcele")
    bounds = q2cfg.get("bounds", [0.0] if kind == "truncated-normal-at-mcele" else None)
    q2 = Proposal2(q2cfg.get("scales", 0.5), kind, bounds)
    return two_step_mh(model, ThetaSplit(init["theta1"], init["theta2"]), q1, q2,
                       cfg["length"], seed, burn_in=burn, rng=rng)


def _sample_outputs(cfg: dict, trace, out: Path, tag: str, plot: bool) -> dict:
    burn = cfg.get("burn_in", 0)
    if burn >= len(trace):
        raise InputError("burn_in must be smaller than length")
    write_trace_csv(trace, out / f"trace{tag}.csv")
    if cfg["model"] == "rats":
        table = apps.rat_table(trace, 0)
        summary = diag.summarize({k: v for k, v in trace.columns().items()
                                  if not k.startswith("theta1_")}, burn,
                                 {"theta0": lambda c: c["theta1c"] - 22.0 * c["theta2c"],
                                  "sigma_eps": lambda c: np.sqrt(c["theta2_1"])})
        watch = {"theta0": table["theta0"], "theta2c": table["theta2c"],
                 "sigma_eps": table["sigma_eps"]}
    else:
        summary = diag.summarize(trace, burn)
        watch = trace.columns()
    summary.write_csv(out / f"summary{tag}.csv")
    (out / f"summary{tag}.json").write_text(summary.to_json())
    report = {"acceptance": diag.acceptance_report(trace), "heidelberger_welch": {},
              "ess": {}}
    for name, series in watch.items():
        post = np.asarray(series)[burn:]
        report["ess"][name] = diag.ess(post) if post.size >= 10 else None
        report["heidelberger_welch"][name] = (
            {k: _json_float(v) if isinstance(v, float) else v
             for k, v in diag.heidelberger_welch(post).to_dict().items()}
            if post.size >= 100 else None)
    _write_json(out / f"diagnostics{tag}.json", report)
    if plot:
        series = {"log_post": trace.log_post, **{k: np.asarray(v) for k, v in watch.items()}}
        trace_svg(dict(list(series.items())[:6]), out / f"trace{tag}.svg", burn)
    return {"summary": summary, "report": report}


def cmd_sample(cfg: dict, seed: int, chains: int, out: Path, plot: bool) -> int:
    if cfg["model"] == "normal_toy":
        _sample_data(cfg)  # fail on bad input before launching workers
    if cfg.get("burn_in", 0) >= cfg["length"]:
        raise InputError("burn_in must be smaller than length")
    traces = _map_chains(_run_sample_chain, [(cfg, seed, c) for c in range(chains)], chains)
    for c, trace in enumerate(traces):
        tag = _suffix(c, chains)
        res = _sample_outputs(cfg, trace, out, tag, plot)
        print(f"chain {c}: {len(trace)} iterations, acceptance "
              f"{res['report']['acceptance']['overall']:.3f}")
        print(res["summary"].to_text())
    return EXIT_OK


# ---------------------------------------------------------------------------
# select


def _column_index(ref, header: Optional[list[str]], width: int) -> int:
    if isinstance(ref, str):
        if header is None or ref not in header:
            raise InputError(f"unknown column {ref!r}")
        return header.index(ref)
    if ref >= width:
        raise InputError(f"column {ref} out of range")
    return ref


def _selection_settings(cfg: dict, dag: bool):
    priors = ms.SelectionPriors(**cfg.get("priors", {}))
    base = apps.DAG_PROPOSALS if dag else ms.SelectionProposals()
    props = ms.SelectionProposals(**{**base.__dict__, **cfg.get("proposals", {})})
    return priors, props


def _regression_data(cfg: dict) -> ms.RegressionData:
    if "synthetic" in cfg:
        s = cfg["synthetic"]
        try:
            rd = ms.synth_regression(s.get("seed", 0), s["n"], s["s"], s["beta_true"],
                                     s.get("sigma_true", 1.0))
        except KeyError as exc:
            raise InputError(f"synthetic regression needs {exc}") from None
    elif "data" in cfg:
        data, header = _read(cfg["data"])
        if "response" not in cfg:
            raise InputError("regression mode needs a response column")
        r = _column_index(cfg["response"], header, data.shape[1])
        covs = cfg.get("covariates")
        cidx = ([_column_index(c, header, data.shape[1]) for c in covs] if covs is not None
                else [j for j in range(data.shape[1]) if j != r])
        rd = ms.RegressionData(data[:, r], data[:, cidx])
    else:
        raise InputError("select needs data or synthetic")
    return rd.standardize() if cfg.get("standardize", False) else rd


def _run_select_chain(cfg: dict, seed: int, chain: int):
    priors, props = _selection_settings(cfg, cfg["mode"] == "dag")
    if cfg["mode"] == "dag":
        problem = _dag_problem(cfg)
        nodes = None
        if "nodes" in cfg:
            unknown = set(cfg["nodes"]) - set(problem.names)
            if unknown:
                raise InputError(f"unknown nodes {sorted(unknown)}")
            nodes = [problem.names.index(n) for n in cfg["nodes"]]
        # per-node streams come from the run seed; chains shift it
        return apps.dag_pipeline(problem, cfg["length"], seed + chain,
                                 burn_in=cfg.get("burn_in", 0), proposals=props,
                                 priors=priors, nodes=nodes)
    return ms.rjmcmc(_regression_data(cfg), cfg["length"], seed, priors=priors,
                     proposals=props, burn_in=cfg.get("burn_in", 0),
                     rng=chain_rng(seed, chain))


def _dag_problem(cfg: dict) -> apps.DagProblem:
    roots = cfg.get("roots", 3)
    if "synthetic" in cfg:
        s = cfg["synthetic"]
        problem, _ = apps.synth_dag(s.get("seed", 0), s.get("n", 100), s.get("nodes", 13),
                                    s.get("roots", roots))
        return problem
    if "data" not in cfg:
        raise InputError("dag mode needs data or synthetic")
    try:
        return apps.read_dag_csv(cfg["data"], roots)
    except OSError as exc:
        raise InputError(f"cannot read {cfg['data']}: {exc}") from None


def _write_model_trace(trace: ms.ModelTrace, out: Path, stem: str) -> dict:
    trace.write_csv(out / f"model_trace{stem}.csv")
    trace.write_frequencies(out / f"model_freq{stem}.json")
    acc = diag.acceptance_report(trace)
    return {"modal_model": trace.modal_model(), "acceptance": acc}


def cmd_select(cfg: dict, seed: int, chains: int, out: Path, plot: bool) -> int:
    if cfg.get("burn_in", 0) >= cfg["length"]:
        raise InputError("burn_in must be smaller than length")
    if cfg["mode"] == "dag":
        _dag_problem(cfg)
    else:
        _regression_data(cfg)
    results = _map_chains(_run_select_chain, [(cfg, seed, c) for c in range(chains)], chains)
    for c, res in enumerate(results):
        tag = _suffix(c, chains)
        if cfg["mode"] == "dag":
            summary = {name: _write_model_trace(tr, out, f"_{name}{tag}")
                       for name, tr in res.traces.items()}
            res.write_edges(out / f"edges{tag}.csv")
            (out / f"graph{tag}.dot").write_text(res.to_dot())
            _write_json(out / f"selection{tag}.json", summary)
            print(f"chain {c}: {len(res.edges)} edges")
            for p, ch in res.edges:
                print(f"  {p} -> {ch}")
        else:
            summary = _write_model_trace(res, out, tag)
            _write_json(out / f"selection{tag}.json", summary)
            if plot:
                ends = res.end_of_iteration()
                trace_svg({"k": res.gamma[ends].sum(1).astype(float),
                           "sigma2": res.sigma2[ends], "log_post": res.log_post[ends]},
                          out / f"model_trace{tag}.svg", res.burn_in)
            acc = summary["acceptance"]["by_move_type"]
            print(f"chain {c}: modal model {summary['modal_model']}, cross-model "
                  f"acceptance {acc.get('cross', float('nan')):.3f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# diagnose


def cmd_diagnose(cfg: dict, out: Optional[Path]) -> int:
    path = cfg["trace"]
    burn = cfg.get("burn_in", 0)
    try:
        with open(path, newline="") as fh:
            header = next(csv.reader(fh), [])
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if header[:2] == ["iter", "move"]:
        mt = ms.read_model_trace_csv(path)
        ends = [i for i, m in enumerate(mt["move"]) if m != "within"]
        cols = {"sigma2": np.array(mt["sigma2"])[ends],
                "k": np.array([b.count("1") for b in mt["gamma_bits"]], dtype=float)[ends],
                "log_post": np.array(mt["log_post"])[ends]}
        acc_arr = np.array(mt["accepted"])
        moves = np.array(mt["move"])
        acceptance = {"overall": float(acc_arr.mean()),
                      "by_move_type": {m: float(acc_arr[moves == m].mean())
                                       for m in sorted(set(mt["move"]))}}
    else:
        try:
            cols, accepted, log_post = read_trace_csv(path)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        cols = {"log_post": log_post, **cols}
        acceptance = {"overall": float(accepted.mean()) if accepted.size else math.nan}
    if "columns" in cfg:
        missing = set(cfg["columns"]) - set(cols)
        if missing:
            raise InputError(f"unknown columns {sorted(missing)}")
        cols = {k: cols[k] for k in cfg["columns"]}
    summary = diag.summarize(cols, burn)
    report = {"acceptance": acceptance, "ess": {}, "heidelberger_welch": {}}
    for name, series in cols.items():
        post = np.asarray(series)[burn:]
        report["ess"][name] = diag.ess(post) if post.size >= 10 else None
        if post.size >= 100:
            hw = diag.heidelberger_welch(post, cfg.get("alpha", 0.05), cfg.get("eps", 0.1))
            report["heidelberger_welch"][name] = {
                k: _json_float(v) if isinstance(v, float) else v
                for k, v in hw.to_dict().items()}
        else:
            report["heidelberger_welch"][name] = None
    print(summary.to_text())
    for name, hw in report["heidelberger_welch"].items():
        if hw is not None:
            print(f"{name}: stationary={hw['stationary']} halfwidth_ok={hw['halfwidth_ok']} "
                  f"ess={report['ess'][name]:.1f}")
    if out is not None:
        summary.write_csv(out / "diagnose_summary.csv")
        _write_json(out / "diagnose.json", report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="run seed (unsigned 64-bit)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--chains", type=int, help="independent chains (default 1)")
    common.add_argument("--no-plot", action="store_true", help="skip SVG output")
    p = argparse.ArgumentParser(prog="bayesel", parents=[common],
                                description="Bayesian empirical likelihood tools")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve-el", parents=[common], help="solve one EL problem, print JSON")
    sub.add_parser("grid", parents=[common], help="log posterior on a 2-D grid")
    sub.add_parser("sample", parents=[common], help="run two-step MH chains")
    sub.add_parser("select", parents=[common], help="reversible-jump model selection")
    d = sub.add_parser("diagnose", parents=[common], help="summaries and diagnostics of a trace CSV")
    d.add_argument("trace", nargs="?", help="trace CSV (overrides the config)")
    d.add_argument("--burn-in", type=int, help="rows to discard")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        extra = {}
        if args.command == "diagnose":
            if args.trace:
                extra["trace"] = args.trace
            if args.burn_in is not None:
                extra["burn_in"] = args.burn_in
        cfg = load_config(args.command, args.config, extra)
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if not 0 <= seed < 2 ** 64:
            raise InputError("seed must be an unsigned 64-bit integer")
        chains = args.chains if args.chains is not None else cfg.get("chains", 1)
        if chains < 1:
            raise InputError("--chains must be at least 1")
        out = None
        if args.out is not None or args.command in ("grid", "sample", "select"):
            out = Path(args.out or "bayesel-out")
            out.mkdir(parents=True, exist_ok=True)
        plot = not args.no_plot
        if args.command == "solve-el":
            return cmd_solve_el(cfg, out)
        if args.command == "grid":
            return cmd_grid(cfg, out, plot)
        if args.command == "sample":
            return cmd_sample(cfg, seed, chains, out, plot)
        if args.command == "select":
            return cmd_select(cfg, seed, chains, out, plot)
        return cmd_diagnose(cfg, out)
    except (InputError, DimensionError, NonFiniteError, EmptyTrace, TooShort) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InitInfeasible as exc:
        print(f"error: infeasible initial state: {exc}", file=sys.stderr)
        return EXIT_INIT
    except (BayesELError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # remaining ValueErrors come from argument checks on config values
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
