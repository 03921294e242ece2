"""Frequency against coupling at the q = 0 ground-state mass, with the q^2 fit.

Usage: python scripts/charge_sweep.py [--qmax 0.3] [--steps 7] [--out sweep.csv]
"""

import argparse

import numpy as np

from gaugewave.cli import quadratic_fit
from gaugewave.io import write_csv
from gaugewave.minimizer import NoBoundStateError, SolverConfig, minimize
from gaugewave.nonlinearity import NonlinearityModel
from gaugewave.radial import RadialGrid
from gaugewave.shooting import solve_shooting


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--omega0", type=float, default=0.8)
    ap.add_argument("--qmax", type=float, default=0.3)
    ap.add_argument("--steps", type=int, default=7)
    ap.add_argument("--out", default="sweep.csv")
    args = ap.parse_args()

    model = NonlinearityModel.saturable(1.0, 1.0)
    grid = RadialGrid()
    sh = solve_shooting(model, args.omega0, grid)
    sigma2 = 0.5 * float(np.dot(grid.weights, sh.u.values**2))
    rows = []
    for q in np.linspace(0.0, args.qmax, args.steps):
        try:
            s = minimize(SolverConfig(q=float(q), sigma2=sigma2), model)
            rows.append((q, s.omega2, s.J_value, s.residual))
        except NoBoundStateError:
            rows.append((q, np.nan, np.nan, np.nan))
        print(f"q={q:.4f} omega2={rows[-1][1]:.10f}")
    write_csv(args.out, ["q", "omega2", "J", "residual"], rows)
    ok = [r for r in rows if np.isfinite(r[1]) and r[0] > 0]
    if len(ok) >= 2:
        a, r2 = quadratic_fit([r[0] for r in ok], [r[1] - rows[0][1] for r in ok])
        print(f"sigma2={sigma2:.10g}  omega2(q) - omega2(0) ~ {a:.5g} q^2  (R^2 {r2:.5f})")


if __name__ == "__main__":
    main()
