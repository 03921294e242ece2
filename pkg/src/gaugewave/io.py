"""Canonical JSON documents for solutions and run records, plus CSV profiles.

Floats are written with 17 significant digits and keys are sorted, so
save -> load -> save reproduces a file byte for byte.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .minimizer import SolitaryWaveSolution
from .nonlinearity import NonlinearityModel
from .radial import RadialGrid

SOLUTION_FORMAT = "gaugewave-solution/1"


class SolutionFileError(ValueError):
    """A solution document is unreadable or incomplete."""


def _float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = "%.17g" % x
    # keep the token a float so int/float identity survives a round trip
    if not any(c in s for c in ".eEn"):
        s += ".0"
    return s


def canonical_dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, one key per line, lists inline."""
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad} {json.dumps(str(k))}: {canonical_dumps(obj[k], indent + 1)}'
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(canonical_dumps(x, indent + 1) for x in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_document(doc: dict, path) -> Path:
    path = Path(path)
    path.write_text(canonical_dumps(doc) + "\n", encoding="utf-8", newline="\n")
    return path


def read_document(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
        doc = json.loads(text)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SolutionFileError(f"{path}: cannot parse ({exc})") from exc
    if not isinstance(doc, dict):
        raise SolutionFileError(f"{path}: top level is not an object")
    return doc


def solution_document(sol: SolitaryWaveSolution, model: NonlinearityModel,
                      config: dict | None = None) -> dict:
    return {
        "format": SOLUTION_FORMAT,
        "grid": {"n_points": sol.u.grid.n_points, "r_max": float(sol.u.grid.r_max)},
        "model": model.params(),
        "config": config or {},
        "q": float(sol.q),
        "sigma2": float(sol.sigma2),
        "omega2": float(sol.omega2),
        "omega2_pairing": float(sol.omega2_pairing),
        "J": float(sol.J_value),
        "energy": float(sol.energy),
        "residual": float(sol.residual),
        "iterations": int(sol.iterations),
        "diagnostics": sol.diagnostics,
        "u": [float(x) for x in sol.u.values],
        "phi": [float(x) for x in sol.phi.values],
    }


def save_solution(sol: SolitaryWaveSolution, model: NonlinearityModel, path,
                  config: dict | None = None) -> Path:
    return write_document(solution_document(sol, model, config), path)


def solution_from_document(doc: dict, source="<document>") -> tuple[SolitaryWaveSolution, NonlinearityModel]:
    if doc.get("format") != SOLUTION_FORMAT:
        raise SolutionFileError(f"{source}: missing or unknown format tag")
    try:
        grid = RadialGrid(int(doc["grid"]["n_points"]), float(doc["grid"]["r_max"]))
        u = grid.field(np.asarray(doc["u"], dtype=float))
        phi = grid.field(np.asarray(doc["phi"], dtype=float), "exterior_harmonic")
        model = NonlinearityModel.from_params(doc["model"])
        sol = SolitaryWaveSolution(
            u=u, phi=phi, omega2=float(doc["omega2"]), sigma2=float(doc["sigma2"]),
            q=float(doc["q"]), J_value=float(doc["J"]), energy=float(doc["energy"]),
            residual=float(doc["residual"]), iterations=int(doc["iterations"]),
            omega2_pairing=float(doc.get("omega2_pairing", float("nan"))),
            diagnostics=doc.get("diagnostics", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SolutionFileError(f"{source}: malformed solution ({exc})") from exc
    return sol, model


def load_solution_with_model(path) -> tuple[SolitaryWaveSolution, NonlinearityModel, dict]:
    doc = read_document(path)
    sol, model = solution_from_document(doc, path)
    return sol, model, doc.get("config", {})


def load_solution(path) -> SolitaryWaveSolution:
    return load_solution_with_model(path)[0]


def write_csv(path, header: list[str], rows) -> Path:
    """Comma-separated, header row, LF line endings, 17 significant digits."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_float(float(x)) if not isinstance(x, (bool, str)) else str(x)
                              for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def write_profile_csv(sol: SolitaryWaveSolution, density: np.ndarray, path) -> Path:
    r = sol.u.r
    return write_csv(path, ["r", "u", "phi", "energy_density"],
                     zip(r, sol.u.values, sol.phi.values, density))
