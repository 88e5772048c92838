"""Command-line front end: solve, eval, check, diagnose, gradcheck.

Traces are CSV (one row per homotopy level), reports and summaries are JSON;
every output file carries a schema string.  Exit codes: 0 success, 1 usage
error, 2 infeasibility, 3 checker refusal.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, fields, replace
from types import SimpleNamespace
from typing import Optional

import numpy as np

from .benchlib import get_problem, problem_names
from .kkt import InfeasiblePointError
from .maxmin import InnerConfig, evaluate_psi_t, approximate_argmax_set
from .problem_model import TriplePoint, check_gradients_fd
from .scholtes import OuterConfig, RelaxationParams, scholtes_solve
from .setvalued import convergence_diagnostic
from .stationarity import (
    Multipliers,
    PatternCapError,
    RelaxedMultipliers,
    check_relaxed_stationarity,
    check_stationarity,
    recover_c_multipliers,
    recover_relaxed_multipliers,
)

TRACE_SCHEMA = "pbopt-trace-1"
SUMMARY_SCHEMA = "pbopt-summary-1"
REPORT_SCHEMA = "pbopt-report-1"
EXCESS_SCHEMA = "pbopt-excess-1"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_REFUSED = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        raise UsageError(message)


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",") if tok.strip() != ""])
    except ValueError as err:
        raise UsageError(f"cannot parse vector {text!r}: {err}") from None


@dataclass
class RunConfig:
    """Flat run configuration; file values are overridden by flags."""

    problem: Optional[str] = None
    t0: float = 1.0
    rho: float = 0.5
    tmin: float = 1e-6
    x0: Optional[str] = None
    seed: int = 0
    max_outer: int = 60
    x_tol: float = 1e-9
    starts: int = 32
    sweeps: int = 5
    u_max: float = 10.0
    workers: int = 0
    trace: Optional[str] = None
    summary: Optional[str] = None
    check: Optional[str] = None


def _load_config(path: Optional[str], args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise UsageError(f"cannot read config {path}: {err}") from None
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = replace(cfg, **data)
    for name in known:
        val = getattr(args, name, None)
        if val is not None:
            cfg = replace(cfg, **{name: val})
    return cfg


def _workers(cfg_workers: int) -> int:
    env = os.environ.get("PESSIM_THREADS")
    w = cfg_workers
    if env is not None:
        try:
            w = int(env)
        except ValueError:
            raise UsageError(f"PESSIM_THREADS must be an integer, got {env!r}") from None
    if w == 0:
        return min(4, os.cpu_count() or 1)
    return max(1, w)


def _inner_config(cfg: RunConfig) -> InnerConfig:
    return InnerConfig(
        starts=cfg.starts,
        sweeps=cfg.sweeps,
        u_max=cfg.u_max,
        seed=cfg.seed,
        workers=_workers(cfg.workers),
    )


def _require_problem(cfg_problem: Optional[str]):
    if not cfg_problem:
        raise UsageError(f"--problem is required (one of: {', '.join(problem_names())})")
    try:
        return get_problem(cfg_problem)
    except KeyError as err:
        raise UsageError(str(err)) from None


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, args)
    problem, _ = _require_problem(cfg.problem)
    params = RelaxationParams(
        t0=cfg.t0,
        rho=cfg.rho,
        t_min=cfg.tmin,
        max_outer_iters=cfg.max_outer,
        x_tol=cfg.x_tol,
        outer=OuterConfig(inner=_inner_config(cfg)),
        seed=cfg.seed,
    )
    x0 = _parse_vector(cfg.x0) if cfg.x0 else None
    trace = scholtes_solve(problem, params, x0)

    trace_path = cfg.trace or f"{cfg.problem}_trace.csv"
    buf = io.StringIO()
    buf.write(f"# schema={TRACE_SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    n = problem.dims.n
    writer.writerow(["k", "t"] + [f"x{i}" for i in range(n)] + ["psi", "inner_status", "evals"])
    for rec in trace.records:
        writer.writerow(
            [rec.k, _fmt(rec.t)]
            + [_fmt(v) for v in rec.x]
            + [_fmt(rec.psi), rec.inner_status, rec.outer_evals]
        )
    with open(trace_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())

    summary = {
        "schema": SUMMARY_SCHEMA,
        "problem": cfg.problem,
        "terminal": trace.terminal,
        "iterations": len(trace.records),
        "seed": cfg.seed,
    }
    if trace.records:
        final = trace.final()
        summary["final_x"] = [float(v) for v in final.x]
        summary["final_psi"] = float(final.psi)
        summary["final_t"] = float(final.t)
        if cfg.check:
            summary["stationarity"] = _stationarity_summary(problem, final, cfg)
    text = json.dumps(summary, indent=2, sort_keys=True)
    if cfg.summary:
        with open(cfg.summary, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    if trace.terminal.startswith("failure"):
        return EXIT_INFEASIBLE
    return EXIT_OK


def _stationarity_summary(problem, final, cfg: RunConfig) -> dict:
    if len(final.argmax) == 0:
        return {"status": "no argmax sample"}
    z = final.argmax.points[0]
    m = problem.dims.m
    pt = TriplePoint(final.x, z[:m], z[m:])
    try:
        mults = recover_c_multipliers(problem, pt, kind=cfg.check)
    except (PatternCapError, InfeasiblePointError) as err:
        return {"status": f"not checked: {err}"}
    if mults is None:
        return {"status": "infeasible", "kind": cfg.check}
    report = check_stationarity(problem, pt, mults, kind=cfg.check)
    return {
        "status": "checked",
        "kind": cfg.check,
        "verdict": bool(report.verdict),
        "residual_inf": float(report.residual_inf),
    }


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, args)
    problem, _ = _require_problem(cfg.problem)
    if args.x is None:
        raise UsageError("--x is required")
    x = _parse_vector(args.x)
    if x.size != problem.dims.n:
        raise UsageError(f"--x must have {problem.dims.n} components, got {x.size}")
    if args.t is None or args.t < 0:
        raise UsageError("--t is required and must be nonnegative")
    res = evaluate_psi_t(problem, x, args.t, _inner_config(cfg))
    out = {
        "schema": REPORT_SCHEMA,
        "problem": cfg.problem,
        "t": float(args.t),
        "x": [float(v) for v in x],
        "status": res.status,
        "value": None if res.status != "solved" else float(res.value),
        "evals": res.evals,
        "argmax": [[float(v) for v in row] for row in res.argmax.points],
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK if res.status == "solved" else EXIT_INFEASIBLE


def _load_point(problem, path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        pt = TriplePoint(
            np.asarray(data["x"], dtype=float),
            np.asarray(data["y"], dtype=float),
            np.asarray(data["u"], dtype=float),
        )
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
        raise UsageError(f"cannot parse point file {path}: {err}") from None
    problem.check_point(pt)
    return data, pt


def cmd_check(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, args)
    problem, _ = _require_problem(cfg.problem)
    if not args.point:
        raise UsageError("--point FILE is required")
    data, pt = _load_point(problem, args.point)
    kind = args.kind
    t = args.t if args.t is not None else float(data.get("t", 0.0))
    try:
        if kind == "relaxed":
            if "multipliers" in data:
                md = data["multipliers"]
                rm = RelaxedMultipliers(*(np.asarray(md[k], dtype=float) for k in ("alpha", "beta", "gamma", "mu", "delta")))
            else:
                rm = recover_relaxed_multipliers(problem, t, pt)
            if rm is None:
                report_dict = {"verdict": False, "status": "no feasible multipliers"}
            else:
                rep = check_relaxed_stationarity(problem, t, pt, rm)
                report_dict = _report_dict(rep)
        else:
            if "multipliers" in data:
                md = data["multipliers"]
                mults = Multipliers(*(np.asarray(md[k], dtype=float) for k in ("alpha", "beta", "gamma")))
            else:
                kw = {} if args.pattern_cap is None else {"pattern_cap": args.pattern_cap}
                mults = recover_c_multipliers(problem, pt, kind=kind, **kw)
            if mults is None:
                report_dict = {"verdict": False, "status": "no feasible multipliers"}
            else:
                rep = check_stationarity(problem, pt, mults, kind=kind)
                report_dict = _report_dict(rep)
    except PatternCapError as err:
        print(json.dumps({"schema": REPORT_SCHEMA, "error": str(err)}, indent=2))
        return EXIT_REFUSED
    except InfeasiblePointError as err:
        print(json.dumps({"schema": REPORT_SCHEMA, "error": str(err)}, indent=2))
        return EXIT_INFEASIBLE
    except KeyError as err:
        raise UsageError(f"multiplier block missing field {err}") from None
    report_dict["schema"] = REPORT_SCHEMA
    report_dict["kind"] = kind
    print(json.dumps(report_dict, indent=2, sort_keys=True))
    return EXIT_OK


def _report_dict(rep) -> dict:
    worst = max(rep.rows, key=rep.rows.get) if rep.rows else None
    return {
        "verdict": bool(rep.verdict),
        "residual_inf": float(rep.residual_inf),
        "rows": {k: float(v) for k, v in rep.rows.items()},
        "worst_row": worst,
        "sign_pattern": list(rep.sign_pattern) if rep.sign_pattern else None,
    }


def _read_trace(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
        rows = list(csv.DictReader(lines))
    except OSError as err:
        raise UsageError(f"cannot read trace {path}: {err}") from None
    if not rows:
        raise UsageError(f"trace {path} is empty")
    return rows


def cmd_diagnose(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, args)
    problem, _ = _require_problem(cfg.problem)
    if not args.trace_file:
        raise UsageError("--trace FILE is required")
    if args.x_bar is None:
        raise UsageError("--x-bar is required")
    x_bar = _parse_vector(args.x_bar)
    rows = _read_trace(args.trace_file)
    n = problem.dims.n
    inner_cfg = _inner_config(cfg)
    records = []
    for row in rows:
        x = np.array([float(row[f"x{i}"]) for i in range(n)])
        t = float(row["t"])
        sample = approximate_argmax_set(problem, x, t, inner_cfg)
        records.append(SimpleNamespace(k=int(row["k"]), t=t, x=x, argmax=sample))
    series = convergence_diagnostic(problem, records, x_bar, inner_cfg)
    out_path = args.out or "excess_series.csv"
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema={EXCESS_SCHEMA}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "t", "excess", "flagged"])
        for e in series.entries:
            writer.writerow([e.k, _fmt(e.t), _fmt(e.excess), int(e.flagged)])
    print(json.dumps({
        "schema": EXCESS_SCHEMA,
        "entries": len(series.entries),
        "limit_estimate": float(series.limit_estimate),
        "out": out_path,
    }, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, args)
    problem, _ = _require_problem(cfg.problem)
    rng = np.random.default_rng(cfg.seed)
    d = problem.dims
    xb = problem.x_box if problem.x_box is not None else np.tile([-1.0, 1.0], (d.n, 1))
    yb = problem.y_box if problem.y_box is not None else np.tile([-1.0, 1.0], (d.m, 1))
    worst: dict[str, float] = {}
    nonfinite: list[str] = []
    for _ in range(args.points):
        pt = TriplePoint(
            rng.uniform(xb[:, 0], xb[:, 1]),
            rng.uniform(yb[:, 0], yb[:, 1]),
            rng.uniform(0.0, 1.0, size=d.q),
        )
        rep = check_gradients_fd(problem, pt)
        for key, val in rep.errors.items():
            worst[key] = max(worst.get(key, 0.0), val)
        nonfinite.extend(rep.nonfinite)
    out = {
        "schema": REPORT_SCHEMA,
        "problem": cfg.problem,
        "points": args.points,
        "max_rel_errors": {k: float(v) for k, v in sorted(worst.items())},
        "nonfinite": sorted(set(nonfinite)),
        "max_overall": float(max(worst.values())) if worst else 0.0,
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="pbopt", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def add_common(p):
        p.add_argument("--problem", type=str, default=None)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--starts", type=int, default=None)
        p.add_argument("--sweeps", type=int, default=None)
        p.add_argument("--u-max", dest="u_max", type=float, default=None)
        p.add_argument("--workers", type=int, default=None)

    p_solve = sub.add_parser("solve", help="run the relaxation homotopy")
    add_common(p_solve)
    p_solve.add_argument("--t0", type=float, default=None)
    p_solve.add_argument("--rho", type=float, default=None)
    p_solve.add_argument("--tmin", type=float, default=None)
    p_solve.add_argument("--x0", type=str, default=None)
    p_solve.add_argument("--max-outer", dest="max_outer", type=int, default=None)
    p_solve.add_argument("--x-tol", dest="x_tol", type=float, default=None)
    p_solve.add_argument("--trace", type=str, default=None)
    p_solve.add_argument("--summary", type=str, default=None)
    p_solve.add_argument("--check", type=str, choices=["C", "M", "S"], default=None)

    p_eval = sub.add_parser("eval", help="evaluate the relaxed value function")
    add_common(p_eval)
    p_eval.add_argument("--x", type=str, default=None)
    p_eval.add_argument("--t", type=float, default=None)

    p_check = sub.add_parser("check", help="stationarity / qualification report")
    add_common(p_check)
    p_check.add_argument("--point", type=str, default=None)
    p_check.add_argument("--kind", type=str, choices=["C", "M", "S", "relaxed"], default="C")
    p_check.add_argument("--t", type=float, default=None)
    p_check.add_argument("--pattern-cap", dest="pattern_cap", type=int, default=None)

    p_diag = sub.add_parser("diagnose", help="excess series along a trace")
    add_common(p_diag)
    p_diag.add_argument("--trace", dest="trace_file", type=str, default=None)
    p_diag.add_argument("--x-bar", dest="x_bar", type=str, default=None)
    p_diag.add_argument("--out", type=str, default=None)

    p_grad = sub.add_parser("gradcheck", help="finite-difference derivative audit")
    add_common(p_grad)
    p_grad.add_argument("--points", type=int, default=50)

    return parser


_COMMANDS = {
    "solve": cmd_solve,
    "eval": cmd_eval,
    "check": cmd_check,
    "diagnose": cmd_diagnose,
    "gradcheck": cmd_gradcheck,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required (solve, eval, check, diagnose, gradcheck)")
        return _COMMANDS[args.command](args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
