"""Command-line front door: parse a JSON config, run one analysis, emit
plot-ready CSV series plus a machine-readable JSON summary.

Exit codes: 0 success, 1 config/validation error, 2 numerical failure.
CSV files use '.' decimals, ',' separators, LF line endings and 17
significant digits, so identical configs reproduce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, codim1, codim2, scan
from .equilibria import all_equilibria, classify, residual_norm
from .integrate import SimOptions, SimulationError, asymptotic_state, simulate
from .model import PARAMETER_NAMES, Parameters, per_capita_growth

__all__ = ["main", "run", "ConfigError"]

SCHEMA = "sip-dyn/1"
COMMANDS = ("simulate", "equilibria", "sweep", "curve", "scan", "threshold", "percapita")


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def _write_summary(outdir: Path, command: str, params: Parameters, options: dict, results: dict):
    doc = {
        "schema": SCHEMA,
        "command": command,
        "tool_version": __version__,
        "parameters": params.as_dict(),
        "options": options,
        "results": _jsonable(results),
    }
    (outdir / "summary.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="ascii", newline="\n"
    )


def _require(options: dict, key: str, default=None):
    if key in options:
        return options[key]
    if default is not None:
        return default
    raise ConfigError(f"missing option {key!r}")


def _sim_options(options: dict) -> SimOptions:
    try:
        return SimOptions(
            t_end=float(options.get("t_end", 500.0)),
            rel_tol=float(options.get("rel_tol", 1e-8)),
            abs_tol=float(options.get("abs_tol", 1e-10)),
            eps_ext=float(options.get("extinction_threshold", 1e-8)),
            conv_window=float(options.get("convergence_window", 20.0)),
            conv_tol=float(options.get("convergence_tol", 1e-6)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _load_config(path: str, cli_command: str | None) -> tuple[str, Parameters, dict]:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if raw.get("schema", SCHEMA) != SCHEMA:
        raise ConfigError(f"unsupported schema {raw.get('schema')!r}")
    command = raw.get("command", cli_command)
    if cli_command is not None and raw.get("command") not in (None, cli_command):
        raise ConfigError(
            f"config command {raw.get('command')!r} does not match CLI command {cli_command!r}"
        )
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    pblock = raw.get("parameters")
    if not isinstance(pblock, dict):
        raise ConfigError("config must contain a 'parameters' object")
    unknown = set(pblock) - set(PARAMETER_NAMES)
    if unknown:
        raise ConfigError(f"unknown parameter names: {sorted(unknown)}")
    missing = set(PARAMETER_NAMES) - set(pblock)
    if missing:
        raise ConfigError(f"missing parameters: {sorted(missing)}")
    try:
        params = Parameters(**{k: float(v) for k, v in pblock.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid parameters: {exc}") from exc
    options = raw.get("options", {})
    if not isinstance(options, dict):
        raise ConfigError("'options' must be an object")
    return command, params, options


# --- command implementations ---------------------------------------------------


def _cmd_simulate(params: Parameters, options: dict, outdir: Path) -> dict:
    ic = _require(options, "initial_state")
    opts = _sim_options(options)
    try:
        traj = simulate(params, ic, opts)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    eqs = [eq for eq in all_equilibria(params) if eq.feasible]
    outcome, kind = asymptotic_state(traj, eqs, tol=float(options.get("outcome_tol", 1e-3)))
    rows = [(t, y[0], y[1], y[2]) for t, y in zip(traj.t, traj.y)]
    files = {"trajectory.csv": (["t", "S", "I", "P"], rows)}
    results = {
        "reason": traj.reason,
        "outcome": outcome,
        "equilibrium_kind": kind,
        "final_state": list(traj.final_state),
        "final_time": float(traj.t[-1]),
        "events": [{"kind": ev.kind, "time": ev.time} for ev in traj.events],
        "steps": int(len(traj.t)),
    }
    return {"files": files, "results": results}


def _cmd_equilibria(params: Parameters, options: dict, outdir: Path) -> dict:
    rows = []
    listing = []
    for eq in all_equilibria(params):
        verdict = ""
        if eq.feasible and eq.kind != "E0":
            try:
                verdict = classify(eq, params).verdict
            except Exception:
                verdict = ""
        rows.append((eq.kind, eq.point.S, eq.point.I, eq.point.P, str(int(eq.feasible)), verdict))
        listing.append(
            {
                "kind": eq.kind,
                "point": list(eq.point),
                "feasible": eq.feasible,
                "verdict": verdict or None,
                "residual": residual_norm(eq, params) if all(np.isfinite(eq.point)) else None,
            }
        )
    files = {"equilibria.csv": (["kind", "S", "I", "P", "feasible", "verdict"], rows)}
    return {"files": files, "results": {"equilibria": listing}}


def _cmd_sweep(params: Parameters, options: dict, outdir: Path) -> dict:
    which = _require(options, "parameter")
    rng = _require(options, "range")
    n = int(options.get("n", 2001))
    try:
        branches, events = codim1.sweep(params, which, float(rng[0]), float(rng[1]), n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = []
    for b in branches:
        for v, eq, rep in zip(b.values, b.equilibria, b.reports):
            stable = "" if rep is None else str(int(rep.verdict == "stable"))
            rows.append((v, eq.point.S, eq.point.I, eq.point.P, stable, str(b.branch_id)))
    files = {"branches.csv": (["param", "S", "I", "P", "stable", "branch_id"], rows)}
    ev_list = [
        {
            "kind": ev.kind,
            "parameter": ev.parameter,
            "value": ev.value,
            "equilibrium": list(ev.equilibrium.point),
            "feasible": ev.equilibrium.feasible,
            "diagnostics": ev.diagnostics,
        }
        for ev in events
    ]
    branch_meta = [
        {"branch_id": b.branch_id, "kind": b.kind, "n_samples": len(b.values)} for b in branches
    ]
    return {"files": files, "results": {"events": ev_list, "branches": branch_meta}}


def _cmd_curve(params: Parameters, options: dict, outdir: Path) -> dict:
    kind = _require(options, "kind")
    p1 = _require(options, "p1")
    p2 = _require(options, "p2")
    seed = _require(options, "seed")
    steps = int(options.get("steps", 400))
    try:
        curve, points = codim2.trace_curve(params, kind, p1, p2, seed, steps=steps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [
        (cp.p1, cp.p2, cp.equilibrium.point.S, cp.equilibrium.point.I, cp.equilibrium.point.P,
         cp.branch, str(int(cp.equilibrium.feasible)))
        for cp in curve
    ]
    files = {"curve.csv": ([p1, p2, "S", "I", "P", "branch", "feasible"], rows)}
    pts = [
        {
            "kind": pt.kind,
            p1: pt.p1,
            p2: pt.p2,
            "equilibrium": list(pt.equilibrium.point),
            "eigenvalues": list(pt.eigenvalues),
            "feasible": pt.feasible,
            "branch": pt.branch,
        }
        for pt in points
    ]
    return {"files": files, "results": {"codim2_points": pts, "n_curve_points": len(curve)}}


def _cmd_scan(params: Parameters, options: dict, outdir: Path, threads: int) -> dict:
    L_range = tuple(options.get("L_range", (-1.0, 1.0)))
    r_range = tuple(options.get("r_range", (0.05, 0.95)))
    nL = int(options.get("nL", 61))
    nr = int(options.get("nr", 61))
    ic = options.get("initial_state", (2.0, 1.0, 3.0))
    opts = _sim_options(options)
    try:
        grid = scan.region_grid(
            params, L_range, r_range, nL, nr, ic, opts,
            outcome_tol=float(options.get("outcome_tol", 1e-3)), n_jobs=threads,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = []
    for i, L in enumerate(grid.L_values):
        for j, r in enumerate(grid.r_values):
            rows.append((L, r, grid.label(i, j)))
    files = {"grid.csv": (["L", "r", "label"], rows)}
    return {"files": files, "results": {"counts": grid.counts(), "nL": nL, "nr": nr}}


def _cmd_threshold(params: Parameters, options: dict, outdir: Path) -> dict:
    tol = float(options.get("tol", 1e-6))
    th = scan.critical_aggregation(params, tol=tol)
    rows = []
    if th.r_feasible is not None:
        rs = np.linspace(th.r_feasible[0] + 1e-9, th.r_feasible[1] - 1e-9, int(options.get("n", 401)))
        for r in rs:
            rows.append((r, scan.infection_growth_at_e3(params.replace(r=float(r)))))
    files = {"threshold.csv": (["r", "infection_growth"], rows)}
    results = {
        "r_star": th.r_star,
        "kind": th.kind,
        "r_feasible": list(th.r_feasible) if th.r_feasible else None,
        "r_feasibility_formula": th.r_feasibility_formula,
    }
    return {"files": files, "results": results}


def _cmd_percapita(params: Parameters, options: dict, outdir: Path) -> dict:
    I_values = [float(v) for v in options.get("I_values", (0.0, 0.5, 2.0))]
    S_range = options.get("S_range", (1e-3, params.K))
    n = int(options.get("n", 401))
    lo, hi = float(S_range[0]), float(S_range[1])
    if not (0.0 < lo < hi <= params.K):
        raise ConfigError(f"S_range {S_range} must lie inside (0, K]")
    Ss = np.linspace(lo, hi, n)
    header = ["S"] + [f"rate_I={_fmt(I)}" for I in I_values]
    rows = []
    for S in Ss:
        rows.append((S, *([per_capita_growth(float(S), I, params) for I in I_values])))
    files = {"percapita.csv": (header, rows)}
    return {"files": files, "results": {"I_values": I_values, "S_range": [lo, hi], "n": n}}


def run(config_path: str, out_dir: str, command: str | None = None, threads: int | None = None) -> int:
    """Execute one config; returns the process exit code."""
    try:
        cmd, params, options = _load_config(config_path, command)
        if threads is None:
            threads = int(os.environ.get("SIP_DYN_THREADS", "1"))
        outdir = Path(out_dir)
        if cmd == "simulate":
            payload = _cmd_simulate(params, options, outdir)
        elif cmd == "equilibria":
            payload = _cmd_equilibria(params, options, outdir)
        elif cmd == "sweep":
            payload = _cmd_sweep(params, options, outdir)
        elif cmd == "curve":
            payload = _cmd_curve(params, options, outdir)
        elif cmd == "scan":
            payload = _cmd_scan(params, options, outdir, threads)
        elif cmd == "threshold":
            payload = _cmd_threshold(params, options, outdir)
        else:
            payload = _cmd_percapita(params, options, outdir)
    except ConfigError as exc:
        print(f"sip-dyn: config error: {exc}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"sip-dyn: numerical failure: {exc}", file=sys.stderr)
        return 2
    except codim2.CurveTraceError as exc:
        print(f"sip-dyn: numerical failure: {exc}", file=sys.stderr)
        return 2

    outdir = Path(out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in payload["files"].items():
        _write_csv(outdir / name, header, rows)
    cmd_options = dict(options)
    _write_summary(outdir, cmd, params, cmd_options, payload["results"])
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sip-dyn",
        description="equilibrium, stability, bifurcation and extinction analysis "
        "of the aggregation/Allee prey-predator disease model",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes for grid scans (default: SIP_DYN_THREADS or 1)")
    args = parser.parse_args(argv)
    return run(args.config, args.out, command=args.command, threads=args.threads)


if __name__ == "__main__":
    sys.exit(main())
