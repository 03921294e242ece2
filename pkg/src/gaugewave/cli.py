"""Command-line interface: solve, validate, boost, sweep-q, check-w, plot.

Exit codes: 0 pass, 1 error or failed validation, 2 no bound state,
3 nonlinearity assumption failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .electrodynamics import (
    CartesianGrid, boost, matter_refinement, matter_residual, maxwell_refinement,
    maxwell_residuals, save_frame,
)
from .functionals import eval_energy_static
from .gauge import solve_phi
from .io import (
    SolutionFileError, load_solution_with_model, read_document, save_solution, write_csv,
    write_document, write_profile_csv,
)
from .minimizer import (
    ConvergenceError, DivergenceError, EmptyRetractionError, NoBoundStateError, SolverConfig,
    minimize, verify_solution,
)
from .nonlinearity import AssumptionError, NonlinearityModel, check_assumptions
from .report import Report
from .svg import LinePlot

EXIT_OK, EXIT_ERROR, EXIT_NO_BOUND_STATE, EXIT_ASSUMPTION, EXIT_USAGE = 0, 1, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- shared helpers -----------------------------------------------------------

def _add_model_args(p, family_flag=("--w", "--family")):
    p.add_argument(*family_flag, dest="family", default=None,
                   choices=["saturable", "quadratic", "power", "tabulated"],
                   help="nonlinearity family (default saturable)")
    p.add_argument("--m0", type=float, default=None)
    p.add_argument("--s0", type=float, default=None)
    p.add_argument("--power", type=float, default=None, help="exponent for the power family")
    p.add_argument("--table", default=None, help="two-column CSV (s, W) for the tabulated family")


def build_model(family=None, m0=None, s0=None, power=None, table=None,
                defaults: dict | None = None) -> NonlinearityModel:
    d = dict(defaults or {})
    family = family or d.get("family", "saturable")
    m0 = m0 if m0 is not None else d.get("m0", 1.0)
    s0 = s0 if s0 is not None else d.get("s0", 1.0)
    if family in ("tabulated", "user_tabulated"):
        if table is None and "table_s" not in d:
            raise UsageError("--table is required for the tabulated family")
        if table is not None:
            return NonlinearityModel.from_csv(table)
        return NonlinearityModel.from_params(d)
    if family == "saturable":
        return NonlinearityModel.saturable(m0, s0)
    if family == "quadratic":
        return NonlinearityModel.quadratic(m0)
    if family == "power":
        return NonlinearityModel.power_law(m0, power if power is not None else d.get("power", 4.0))
    raise UsageError(f"unknown family {family!r}")


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must be a JSON object")
    return doc


def build_config(overrides: dict, file_cfg: dict) -> SolverConfig:
    names = {f.name for f in fields(SolverConfig)}
    solver = dict(file_cfg.get("solver", {k: v for k, v in file_cfg.items() if k in names}))
    unknown = set(solver) - names
    if unknown:
        raise UsageError(f"unknown solver settings: {sorted(unknown)}")
    solver.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SolverConfig(**solver)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _companion(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def _print_report(title: str, rep: Report, stream=None) -> None:
    stream = stream or sys.stdout
    print(title, file=stream)
    print(rep.table(), file=stream)


# -- commands -----------------------------------------------------------------

def cmd_check_w(args) -> int:
    try:
        model = build_model(args.family, args.m0, args.s0, args.power, args.table)
    except (OSError, ValueError) as exc:
        _err(f"check-w: {exc}")
        return EXIT_ERROR
    rep = check_assumptions(model, s_max=args.s_max, n_samples=args.n_samples, omega0=args.omega0)
    print(f"family             {model.family}")
    print(rep.format())
    if rep.w3 and rep.m1_measured < rep.m0_measured:
        print(f"frequency window   ({rep.m1_measured:.6g}, {rep.m0_measured:.6g})")
    else:
        print("frequency window   empty (W3 fails)")
    return EXIT_OK if rep.all_w else EXIT_ASSUMPTION


def run_solve(config: SolverConfig, model: NonlinearityModel) -> dict:
    """Solve one point; returns a summary row usable by sweeps."""
    try:
        sol = minimize(config, model)
    except NoBoundStateError as exc:
        return {"status": "no_bound_state", "message": str(exc), "q": config.q,
                "rayleigh": exc.history.get("rayleigh", [])}
    except (ConvergenceError, DivergenceError, EmptyRetractionError) as exc:
        return {"status": "error", "message": str(exc), "q": config.q}
    return {"status": "ok", "q": config.q, "solution": sol}


def cmd_solve(args) -> int:
    file_cfg = load_config(args.config)
    config = build_config({"q": args.q, "sigma2": args.sigma2, "n_points": args.n_points,
                           "r_max": args.r_max, "tol_residual": args.tol,
                           "max_iters": args.max_iters, "seed_profile": args.seed,
                           "seed_path": args.seed_path}, file_cfg)
    model = build_model(args.family, args.m0, args.s0, args.power, args.table,
                        file_cfg.get("model"))
    out = Path(args.out)
    report = check_assumptions(model)
    record_path = _companion(out, ".record.json")
    record = {"tool_version": __version__, "config_echo": config.as_dict(),
              "model_echo": model.params(), "assumptions": report.as_dict()}
    if not report.all_w:
        _err("nonlinearity fails its assumptions:\n" + report.format())
        record["status"] = "assumption_failure"
        write_document(record, record_path)
        return EXIT_ASSUMPTION

    res = run_solve(config, model)
    if res["status"] != "ok":
        _err(res["message"])
        record["status"] = res["status"]
        record["message"] = res["message"]
        write_document(record, record_path)
        return EXIT_NO_BOUND_STATE if res["status"] == "no_bound_state" else EXIT_ERROR

    sol = res["solution"]
    checks = verify_solution(sol, model, config.q, config.tol_residual)
    gs = solve_phi(sol.u, sol.q)
    _, density = eval_energy_static(sol.u, gs, math.sqrt(sol.omega2), model)
    save_solution(sol, model, out, config.as_dict())
    csv_path = write_profile_csv(sol, density.values, _companion(out, ".csv"))
    record.update({
        "status": "ok" if checks.passed else "validation_failed",
        "solution_summary": {"omega2": sol.omega2, "omega2_pairing": sol.omega2_pairing,
                             "sigma2": sol.sigma2, "J": sol.J_value, "energy": sol.energy,
                             "residual": sol.residual, "iterations": sol.iterations},
        "check_results": checks.as_dict(),
        "artifact_paths": [out.name, csv_path.name, record_path.name],
    })
    write_document(record, record_path)
    print(f"omega2    {sol.omega2:.12g}")
    print(f"sigma2    {sol.sigma2:.12g}")
    print(f"J         {sol.J_value:.12g}")
    print(f"energy    {sol.energy:.12g}")
    print(f"residual  {sol.residual:.3e}  ({sol.iterations} iterations)")
    _print_report("checks", checks)
    if not checks.passed:
        _err("failed checks: " + ", ".join(checks.failed()))
        return EXIT_ERROR
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        sol, model, cfg = load_solution_with_model(args.input)
    except (SolutionFileError, OSError) as exc:
        _err(f"validate: {exc}")
        return EXIT_ERROR
    tol = float(cfg.get("tol_residual", 1e-8)) if isinstance(cfg, dict) else 1e-8
    rep = verify_solution(sol, model, sol.q, tol)
    _print_report(f"validation of {args.input}", rep)
    if not rep.passed:
        _err("failed checks: " + ", ".join(rep.failed()))
        return EXIT_ERROR
    return EXIT_OK


def cmd_boost(args) -> int:
    if not abs(args.v) < 1.0:
        _err(f"boost: |v| must be < 1, got {args.v}")
        return EXIT_USAGE
    try:
        grid = CartesianGrid(args.grid, args.halfwidth)
    except ValueError as exc:
        _err(f"boost: {exc}")
        return EXIT_USAGE
    try:
        sol, model, _ = load_solution_with_model(args.input)
    except (SolutionFileError, OSError) as exc:
        _err(f"boost: {exc}")
        return EXIT_ERROR
    dt = grid.spacing / 4.0
    out = Path(args.out)
    frame = boost(sol, args.v, args.t, grid)
    later = boost(sol, args.v, args.t + dt, grid)
    rep = maxwell_residuals(frame, later)
    if sol.q > 0:
        earlier = boost(sol, args.v, args.t - dt, grid)
        rep.merge(matter_residual(frame, (earlier, later), model, sol.q))
        del earlier
    save_frame(frame, out)
    doc = {"tool_version": __version__, "frame": out.name, "v": args.v, "t": args.t,
           "n_per_axis": grid.n_per_axis, "half_width": grid.half_width, "dt": dt,
           "residuals": rep.as_dict(), "diagnostics": frame.diagnostics}
    del frame, later
    _print_report(f"residuals at t={args.t:g}, v={args.v:g}, n={grid.n_per_axis}", rep)
    ok = True
    if args.refine:
        orders = maxwell_refinement(sol, args.v, args.t, grid)
        if sol.q > 0:
            orders.merge(matter_refinement(sol, model, args.v, args.t, grid))
        doc["refinement"] = orders.as_dict()
        _print_report(f"refinement n={grid.n_per_axis} -> {2 * grid.n_per_axis}", orders)
        ok = orders.passed
    write_document(doc, _companion(out, ".report.json"))
    if not ok:
        _err("boost: refinement orders below threshold")
        return EXIT_ERROR
    return EXIT_OK


def _sweep_point(payload):
    config, model_params = payload
    res = run_solve(config, NonlinearityModel.from_params(model_params))
    if res["status"] == "ok":
        s = res["solution"]
        return {"q": config.q, "omega2": s.omega2, "J": s.J_value, "residual": s.residual,
                "converged": True}
    return {"q": config.q, "omega2": float("nan"), "J": float("nan"),
            "residual": float("nan"), "converged": False, "message": res["message"]}


def quadratic_fit(qs, d_omega2) -> tuple[float, float]:
    """Least-squares a in d = a q^2 and its coefficient of determination."""
    qs = np.asarray(qs, dtype=float)
    d = np.asarray(d_omega2, dtype=float)
    x = qs**2
    a = float(np.dot(x, d) / np.dot(x, x))
    ss_res = float(np.sum((d - a * x) ** 2))
    ss_tot = float(np.sum((d - d.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return a, r2


def cmd_sweep(args) -> int:
    if args.steps < 1 or args.qmin > args.qmax or args.qmin < 0:
        _err("sweep-q: empty q range (need 0 <= qmin <= qmax and steps >= 1)")
        return EXIT_USAGE
    if args.steps == 1 or args.qmin == args.qmax:
        qs = [args.qmin]
    else:
        qs = [float(q) for q in np.linspace(args.qmin, args.qmax, args.steps)]
    if args.q_values:
        qs = sorted(float(q) for q in args.q_values.split(","))
    file_cfg = load_config(args.config)
    model = build_model(args.family, args.m0, args.s0, args.power, args.table, file_cfg.get("model"))
    report = check_assumptions(model)
    if not report.all_w:
        _err("nonlinearity fails its assumptions:\n" + report.format())
        return EXIT_ASSUMPTION
    base = {"sigma2": args.sigma2, "n_points": args.n_points, "r_max": args.r_max}
    configs = [build_config({**base, "q": q}, file_cfg) for q in qs]
    payload = [(c, model.params()) for c in configs]
    workers = max(1, int(os.environ.get("GAUGEWAVE_THREADS", "1") or 1))
    if workers > 1 and len(payload) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(payload))) as ex:
            rows = list(ex.map(_sweep_point, payload))
    else:
        rows = [_sweep_point(p) for p in payload]

    out = Path(args.out)
    write_csv(out, ["q", "omega2", "J", "residual", "converged"],
              [(r["q"], r["omega2"], r["J"], r["residual"], "true" if r["converged"] else "false")
               for r in rows])
    ok_rows = [r for r in rows if r["converged"]]
    summary = {"tool_version": __version__, "sigma2": args.sigma2, "model_echo": model.params(),
               "rows": rows, "largest_converged_q": max((r["q"] for r in ok_rows), default=None)}
    base_row = next((r for r in ok_rows if r["q"] == 0.0), None)
    if base_row is not None and len(ok_rows) >= 3:
        rest = [r for r in ok_rows if r["q"] > 0]
        a, r2 = quadratic_fit([r["q"] for r in rest], [r["omega2"] - base_row["omega2"] for r in rest])
        summary["quadratic_fit"] = {"coefficient": a, "r_squared": r2}
    plot = LinePlot(title="omega^2 against q", xlabel="q", ylabel="omega^2")
    plot.add([r["q"] for r in ok_rows], [r["omega2"] for r in ok_rows], "omega^2", markers=True)
    svg_path = plot.save(_companion(out, ".svg"))
    summary["artifact_paths"] = [out.name, svg_path.name]
    write_document(summary, _companion(out, ".summary.json"))
    for r in rows:
        state = "converged" if r["converged"] else "failed: " + r.get("message", "")
        print(f"q={r['q']:<10.6g} omega2={r['omega2']:<18.12g} {state}")
    if "quadratic_fit" in summary:
        f = summary["quadratic_fit"]
        print(f"omega2(q) - omega2(0) ~ {f['coefficient']:.6g} q^2, R^2 = {f['r_squared']:.6f}")
    print(f"largest converged q: {summary['largest_converged_q']}")
    return EXIT_OK if len(ok_rows) == len(rows) else EXIT_NO_BOUND_STATE


def cmd_plot(args) -> int:
    src = Path(args.input)
    out = Path(args.out)
    try:
        if src.suffix == ".csv":
            lines = src.read_text(encoding="utf-8").strip().splitlines()
            header = lines[0].split(",")
            data = np.array([[float(x) if x not in ("true", "false") else float(x == "true")
                              for x in ln.split(",")] for ln in lines[1:]])
            x = data[:, 0]
            plot = LinePlot(title=src.name, xlabel=header[0], ylabel=header[1])
            plot.add(x, data[:, 1], header[1], markers=len(x) < 50)
        else:
            sol, _, _ = load_solution_with_model(src)
            r = sol.u.r
            vals = sol.u.values
            keep = r <= min(r[-1], args.r_plot or 4.0 * r[np.argmax(vals <= 1e-3 * vals.max())] + 1.0)
            plot = LinePlot(title=f"q={sol.q:g}, sigma2={sol.sigma2:g}, omega2={sol.omega2:.6g}",
                            xlabel="r", ylabel="profile")
            plot.add(r[keep], vals[keep], "u")
            if sol.q > 0:
                plot.add(r[keep], sol.phi.values[keep], "Phi")
    except (SolutionFileError, OSError, ValueError, IndexError) as exc:
        _err(f"plot: {exc}")
        return EXIT_ERROR
    plot.save(out)
    print(f"wrote {out}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gaugewave", description="Gauge-coupled solitary waves")
    p.add_argument("--version", action="version", version=f"gaugewave {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="minimize J on the constraint manifold")
    s.add_argument("--q", type=float, required=True)
    s.add_argument("--sigma2", type=float, required=True)
    s.add_argument("--config", default=None, help="JSON file with 'solver' and 'model' sections")
    s.add_argument("--out", required=True)
    s.add_argument("--n-points", type=int, default=None)
    s.add_argument("--r-max", type=float, default=None)
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--max-iters", type=int, default=None)
    s.add_argument("--seed", choices=["gaussian", "compact_bump", "file"], default=None)
    s.add_argument("--seed-path", default=None)
    _add_model_args(s)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="re-check a stored solution")
    v.add_argument("--in", dest="input", required=True)
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("boost", help="boosted 3D frame and field-equation residuals")
    b.add_argument("--in", dest="input", required=True)
    b.add_argument("--v", type=float, required=True)
    b.add_argument("--t", type=float, default=0.0)
    b.add_argument("--grid", type=int, default=48)
    b.add_argument("--halfwidth", type=float, default=12.0)
    b.add_argument("--out", required=True)
    b.add_argument("--refine", action="store_true", help="also run on the doubled grid")
    b.set_defaults(func=cmd_boost)

    w = sub.add_parser("sweep-q", help="solve across a range of couplings")
    w.add_argument("--qmin", type=float, required=True)
    w.add_argument("--qmax", type=float, required=True)
    w.add_argument("--steps", type=int, required=True)
    w.add_argument("--sigma2", type=float, required=True)
    w.add_argument("--q-values", default=None, help="explicit comma-separated q list")
    w.add_argument("--out", default="sweep.csv")
    w.add_argument("--config", default=None)
    w.add_argument("--n-points", type=int, default=None)
    w.add_argument("--r-max", type=float, default=None)
    _add_model_args(w)
    w.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check-w", help="check the nonlinearity assumptions")
    _add_model_args(c, ("--family", "--w"))
    c.add_argument("--omega0", type=float, default=None)
    c.add_argument("--s-max", type=float, default=1e3)
    c.add_argument("--n-samples", type=int, default=4001)
    c.set_defaults(func=cmd_check_w)

    pl = sub.add_parser("plot", help="SVG of a solution profile or a sweep CSV")
    pl.add_argument("--in", dest="input", required=True)
    pl.add_argument("--out", required=True)
    pl.add_argument("--r-plot", type=float, default=None)
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args))
    except UsageError as exc:
        _err(f"{args.command}: {exc}")
        return EXIT_USAGE
    except AssumptionError as exc:
        _err(f"{args.command}: {exc}")
        return EXIT_ASSUMPTION
    except (OSError, SolutionFileError) as exc:
        _err(f"{args.command}: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
