"""Benchmark command line: run one algorithm, sweep a parameter grid, list the corpus.

Subcommands
-----------
run     execute a single seeded run and emit one JSON report
sweep   execute a cross-product grid of runs and emit one CSV row per run
corpus  print the corpus manifest

Exit codes: 0 success, 1 runtime failure, 2 spec/schema error.  Reports are
deterministic for a fixed spec (seed included) up to the wall_time_ms field.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from qnumopt import corpus
from qnumopt.bnb import NodeBudgetError, bnb_minimize
from qnumopt.costs import table1_report
from qnumopt.direct import direct_minimize
from qnumopt.emulators import EmulatorConfig
from qnumopt.linesearch import LineSearchConfig, backtracking_descent, make_provider
from qnumopt.minibatch import GradAccuracySpec, required_batch_size, sgd_minimize
from qnumopt.neldermead import NMConfig, nm_minimize, nm_quantum_mode
from qnumopt.objective import CountingOracle

ALGORITHMS = ("bnb-galperin", "direct", "line-search", "nelder-mead", "sgd")
MODES = ("classical", "quantum-emulated", "both")

# (type, default); None defaults mean "derived at run time"
PARAM_SCHEMAS = {
    "bnb-galperin": {
        "eps": (float, 0.05),
        "q": (int, 2),
        "K": (float, None),
        "max_nodes": (int, None),
        "strict_prune": (bool, False),
        "tf": (float, 1.0),
    },
    "direct": {"eps_direct": (float, 1e-4), "T": (int, 50), "tf": (float, 1.0)},
    "line-search": {
        "gamma": (float, 0.5),
        "beta": (float, 0.5),
        "grad_tolerance": (float, 1e-3),
        "k_max": (int, 100),
        "m_cap": (int, 64),
        "direction": (str, "steepest-descent"),
        "x0": (str, None),
        "tf": (float, 1.0),
    },
    "nelder-mead": {
        "alpha": (float, 1.0),
        "beta": (float, 2.0),
        "gamma": (float, 0.5),
        "delta": (float, 0.5),
        "k_max": (int, 200),
        "f_tol": (float, 1e-8),
        "scale": (float, None),
        "x0": (str, None),
        "k_budget": (int, None),
        "tf": (float, 1.0),
    },
    "sgd": {
        "eps": (float, 0.1),
        "delta": (float, 0.05),
        "steps": (int, 100),
        "eta0": (float, 0.1),
        "schedule": (str, "constant"),
        "tf": (float, 1.0),
    },
}

_STAT_KEYS = ("t_min", "d", "k", "s", "m0_list", "m_max", "k_b", "m")


class SpecError(ValueError):
    """Invalid run specification (exit code 2)."""


def _coerce(algorithm: str, key: str, raw: str):
    schema = PARAM_SCHEMAS[algorithm]
    if key not in schema:
        raise SpecError(f"unknown parameter {key!r} for algorithm {algorithm!r}")
    typ, _ = schema[key]
    if typ is bool:
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise SpecError(f"parameter {key!r} expects a boolean, got {raw!r}")
    try:
        return typ(raw)
    except ValueError as exc:
        raise SpecError(f"parameter {key!r}: {exc}") from exc


def build_spec(algorithm: str, function: str, seed: int, mode: str, raw_params: dict) -> dict:
    if algorithm not in ALGORITHMS:
        raise SpecError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    if mode not in MODES:
        raise SpecError(f"unknown mode {mode!r}; choose from {MODES}")
    params = {k: default for k, (_, default) in PARAM_SCHEMAS[algorithm].items()}
    for key, value in raw_params.items():
        if isinstance(value, str):
            value = _coerce(algorithm, key, value)
        elif key not in params:
            raise SpecError(f"unknown parameter {key!r} for algorithm {algorithm!r}")
        params[key] = value
    return {
        "algorithm": algorithm,
        "function": function,
        "params": params,
        "seed": int(seed),
        "mode": mode,
    }


def _parse_x0(raw, fn):
    if raw is None:
        return 0.5 * (fn.lower + fn.upper)
    vec = np.array([float(v) for v in str(raw).split(",")])
    if len(vec) != fn.dimension:
        raise SpecError(f"x0 needs {fn.dimension} coordinates")
    return vec


def _null_stats() -> dict:
    return {k: None for k in _STAT_KEYS}


def execute_run(spec: dict) -> dict:
    """Run a validated spec and assemble the report dictionary."""
    t0 = time.perf_counter()
    try:
        fn = corpus.corpus_lookup(spec["function"])
    except corpus.CorpusLookupError as exc:
        raise SpecError(str(exc)) from exc
    p = spec["params"]
    stats = _null_stats()
    queries = {"classical": None, "quantum_emulated": None}
    cost_models = None
    f_opt = None
    x_opt = None

    if spec["algorithm"] == "bnb-galperin":
        K = p["K"] if p["K"] is not None else fn.lipschitz_K
        if K is None:
            raise SpecError(f"function {fn.name!r} has no recorded K; pass K explicitly")
        oracle = CountingOracle(fn)
        try:
            f_opt, x_vec, st = bnb_minimize(
                oracle, K=K, eps=p["eps"], q=p["q"],
                max_nodes=p["max_nodes"], strict_prune=p["strict_prune"],
            )
        except NodeBudgetError as exc:
            f_opt, x_vec, st = exc.partial
        x_opt = [float(v) for v in x_vec]
        stats.update(t_min=st.t_min, d=st.max_depth)
        queries["classical"] = st.queries_actual
        cost_models = table1_report(
            {
                "bnb": {
                    "t_min": st.t_min, "d": max(1, st.max_depth), "n": fn.dimension,
                    "tf": p["tf"], "eps": p["eps"], "classical_measured": st.queries_actual,
                }
            }
        ).row("bnb")

    elif spec["algorithm"] == "direct":
        oracle = CountingOracle(fn)
        res = direct_minimize(oracle, eps_direct=p["eps_direct"], T=p["T"])
        f_opt = res.f_min
        x_opt = [float(v) for v in res.x_min]
        stats.update(k=p["T"], m=res.state.m)
        queries["classical"] = oracle.eval_count

    elif spec["algorithm"] == "line-search":
        config = LineSearchConfig(
            gamma=p["gamma"], beta=p["beta"], m_cap=p["m_cap"],
            k_max=p["k_max"], grad_tolerance=p["grad_tolerance"],
        )
        x0 = _parse_x0(p["x0"], fn)
        try:
            provider = make_provider(p["direction"])
        except ValueError as exc:
            raise SpecError(str(exc)) from exc
        runs = {}
        modes = ("classical", "quantum") if spec["mode"] == "both" else (
            ("quantum",) if spec["mode"] == "quantum-emulated" else ("classical",)
        )
        for m in modes:
            oracle = CountingOracle(fn)
            prov = make_provider(p["direction"])
            xf, trace = backtracking_descent(
                oracle, x0, prov, config,
                quantum=(m == "quantum"),
                emulator=EmulatorConfig(seed=spec["seed"]),
                rng=np.random.default_rng(spec["seed"]),
            )
            runs[m] = (oracle, prov, xf, trace)
        oracle, prov, xf, trace = runs.get("classical", runs.get("quantum"))
        f_opt = fn.raw(xf)
        x_opt = [float(v) for v in xf]
        m0_list = [r["m0"] for r in trace.records]
        stats.update(k=trace.k, m0_list=m0_list, m_max=trace.m_max)
        queries["classical"] = trace.queries_classical
        if "quantum" in runs:
            queries["quantum_emulated"] = runs["quantum"][3].queries_quantum_emulated
        tau_d = prov.tau_model(fn.dimension)
        cost_models = table1_report(
            {
                "line-search": {
                    "k": max(1, trace.k), "tau_d": tau_d, "m_max": max(1, trace.m_max),
                    "tf": p["tf"], "classical_measured": trace.queries_classical,
                    "quantum_emulated": queries["quantum_emulated"],
                }
            }
        ).row("line-search")

    elif spec["algorithm"] == "nelder-mead":
        config = NMConfig(
            alpha=p["alpha"], beta=p["beta"], gamma=p["gamma"], delta=p["delta"],
            f_tol=p["f_tol"], k_max=p["k_max"],
        )
        x0 = _parse_x0(p["x0"], fn)
        k_budget = p["k_budget"] or p["k_max"]
        runs = {}
        modes = ("classical", "quantum") if spec["mode"] == "both" else (
            ("quantum",) if spec["mode"] == "quantum-emulated" else ("classical",)
        )
        for m in modes:
            oracle = CountingOracle(fn)
            if m == "classical":
                best, st, _tr = nm_minimize(oracle, x0, config, scale=p["scale"])
            else:
                best, st, _tr = nm_quantum_mode(
                    oracle, x0, config, EmulatorConfig(seed=spec["seed"]),
                    k_budget=k_budget, scale=p["scale"],
                    rng=np.random.default_rng(spec["seed"]),
                )
            runs[m] = (oracle, best, st)
        oracle, best, st = runs.get("classical", runs.get("quantum"))
        f_opt = fn.raw(best)
        x_opt = [float(v) for v in best]
        stats.update(k=st.k, s=st.s)
        queries["classical"] = st.queries_classical
        if "quantum" in runs:
            queries["quantum_emulated"] = runs["quantum"][2].queries_quantum_emulated
        cost_models = table1_report(
            {
                "nelder-mead": {
                    "k": max(1, st.k), "s": st.s, "n": fn.dimension, "tf": p["tf"],
                    "classical_measured": st.queries_classical,
                    "quantum_emulated": queries["quantum_emulated"],
                }
            }
        ).row("nelder-mead")

    elif spec["algorithm"] == "sgd":
        try:
            avg = corpus.corpus_lookup_averaged(spec["function"])
        except corpus.CorpusLookupError as exc:
            raise SpecError(str(exc)) from exc
        gspec = GradAccuracySpec(eps=p["eps"], delta=p["delta"])
        if p["schedule"] == "constant":
            eta = p["eta0"]
        elif p["schedule"] == "inv_t":
            eta = lambda t: p["eta0"] / t
        else:
            raise SpecError(f"unknown schedule {p['schedule']!r}")
        traj = sgd_minimize(avg, _parse_x0(None, fn), eta, p["steps"], gspec, seed=spec["seed"])
        last = traj[-1]
        f_opt = last["f_probe"]
        x_opt = [float(v) for v in last["x"]]
        stats.update(k=p["steps"], k_b=last["k_b"])
        queries["classical"] = last["queries"]
        cost_models = table1_report(
            {
                "gradient": {
                    "n": fn.dimension, "tf": p["tf"], "eps": p["eps"],
                    "classical_measured": last["queries"],
                }
            }
        ).row("gradient")

    return {
        "spec": spec,
        "f_opt": f_opt,
        "x_opt": x_opt,
        "stats": stats,
        "queries": queries,
        "cost_models": cost_models,
        "wall_time_ms": (time.perf_counter() - t0) * 1e3,
    }


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return "" if value is None else str(value)


SWEEP_COLUMNS = (
    ["status", "algorithm", "function", "seed", "mode", "params"]
    + [f"stats_{k}" for k in _STAT_KEYS]
    + ["f_opt", "x_opt", "queries_classical", "queries_quantum_emulated",
       "classical_model", "quantum_model", "quantum_polylog", "wall_time_ms"]
)


def _flatten(report: dict, status: str) -> list[str]:
    spec = report.get("spec", {})
    stats = report.get("stats", _null_stats())
    cm = report.get("cost_models") or {}
    row = [
        status,
        spec.get("algorithm"),
        spec.get("function"),
        spec.get("seed"),
        spec.get("mode"),
        json.dumps(spec.get("params", {}), sort_keys=True),
    ]
    row += [stats.get(k) for k in _STAT_KEYS]
    row += [
        report.get("f_opt"),
        report.get("x_opt"),
        (report.get("queries") or {}).get("classical"),
        (report.get("queries") or {}).get("quantum_emulated"),
        cm.get("classical_model"),
        cm.get("quantum_model"),
        cm.get("quantum_polylog"),
        report.get("wall_time_ms"),
    ]
    return [_fmt(v) for v in row]


def run_sweep(grid_spec: dict) -> str:
    """Cross-product sweep; one CSV row per cell in grid order."""
    base = grid_spec.get("base")
    if base is None:
        raise SpecError("grid file needs a 'base' run spec")
    grid = grid_spec.get("grid") or {}
    out = io.StringIO()
    writer = csv.writer(out, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)

    keys = list(grid.keys())
    if keys:
        import itertools

        for combo in itertools.product(*(grid[k] for k in keys)):
            cell = json.loads(json.dumps(base))  # deep copy
            for key, value in zip(keys, combo):
                if key.startswith("params."):
                    cell.setdefault("params", {})[key.split(".", 1)[1]] = value
                else:
                    cell[key] = value
            try:
                spec = build_spec(
                    cell.get("algorithm"), cell.get("function"), cell.get("seed", 0),
                    cell.get("mode", "classical"), cell.get("params", {}),
                )
                report = execute_run(spec)
                writer.writerow(_flatten(report, "ok"))
            except Exception as exc:  # record and continue
                writer.writerow(_flatten({"spec": cell}, f"error: {exc}"))
    return out.getvalue()


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _error(exc, code):
    sys.stdout.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="qnumopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single run")
    p_run.add_argument("--algorithm", required=True)
    p_run.add_argument("--function", required=True)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--mode", default="classical")
    p_run.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p_run.add_argument("--out", default=None)

    p_sweep = sub.add_parser("sweep", help="execute a grid of runs")
    p_sweep.add_argument("--grid", required=True, help="JSON grid file")
    p_sweep.add_argument("--out", default=None)

    p_corpus = sub.add_parser("corpus", help="print the corpus manifest")
    p_corpus.add_argument("--format", choices=("text", "json"), default="text")
    p_corpus.add_argument("--out", default=None)

    args = parser.parse_args(argv)

    if args.command == "run":
        raw_params = {}
        for item in args.param:
            if "=" not in item:
                return _error(SpecError(f"--param expects KEY=VALUE, got {item!r}"), 2)
            key, _, value = item.partition("=")
            raw_params[key] = value
        try:
            spec = build_spec(args.algorithm, args.function, args.seed, args.mode, raw_params)
            report = execute_run(spec)
        except SpecError as exc:
            return _error(exc, 2)
        except Exception as exc:
            return _error(exc, 1)
        _emit(report_json(report), args.out)
        return 0

    if args.command == "sweep":
        try:
            with open(args.grid) as fh:
                grid_spec = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            return _error(exc, 2)
        try:
            csv_text = run_sweep(grid_spec)
        except SpecError as exc:
            return _error(exc, 2)
        _emit(csv_text, args.out)
        return 0

    if args.command == "corpus":
        rows = corpus.corpus_manifest()
        if args.format == "json":
            text = corpus.manifest_json()
        else:
            lines = [f"{'name':24s} {'n':>3s} {'K':>12s}  known minimum"]
            for r in rows:
                k = "-" if r["K"] is None else f"{r['K']:.6g}"
                km = "-" if r["known_min_value"] is None else f"{r['known_min_value']:.6g} at {r['known_min_point']}"
                lines.append(f"{r['name']:24s} {r['n']:3d} {k:>12s}  {km}")
            text = "\n".join(lines)
        manifest_env = os.environ.get("QNUMOPT_CORPUS_MANIFEST")
        if manifest_env:
            with open(manifest_env, "w") as fh:
                fh.write(corpus.manifest_json())
        _emit(text, args.out)
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
