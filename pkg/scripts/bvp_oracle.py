"""Coupled (u, Phi) radial boundary-value solve used to freeze reference values.

Independent of the finite-difference minimizer: scipy's collocation solver
handles u'' + 2u'/r = W'(u) - w2 (1 - q Phi)^2 u and
Phi'' + 2Phi'/r = q^2 u^2 Phi - q u^2 with w2 as an unknown parameter fixed
by the constraint 1/2 int u^2 (1 - q Phi) = sigma2.

    python3 scripts/bvp_oracle.py --sigma2 102.1301650754056 --q 0.025 0.05 0.1
"""

import argparse

import numpy as np
from scipy.integrate import solve_bvp

from gaugewave.nonlinearity import NonlinearityModel
from gaugewave.radial import RadialGrid
from gaugewave.shooting import solve_shooting


def coupled_bvp(model, q, sigma2, guess_r, guess_u, w2_guess, r0=1e-3, R=40.0):
    r = np.linspace(r0, R, 4000)
    u = np.interp(r, guess_r, guess_u)
    du = np.gradient(u, r)
    y = np.vstack([u, du, np.zeros_like(r), np.zeros_like(r), np.zeros_like(r)])

    def f(r, y, p):
        u, du, ph, dph, m = y
        w2 = p[0]
        return np.vstack([
            du, model.dW(u) - w2 * (1 - q * ph) ** 2 * u - 2 * du / r,
            dph, q**2 * u**2 * ph - q * u**2 - 2 * dph / r,
            4 * np.pi * r**2 * 0.5 * u**2 * (1 - q * ph),
        ])

    def bc(ya, yb, p):
        kappa = np.sqrt(max(model.m0**2 - p[0], 1e-12))
        return np.array([ya[1], ya[3], ya[4],
                         yb[1] + (kappa + 1 / R) * yb[0],   # decaying tail e^{-kappa r}/r
                         yb[3] + yb[2] / R,                 # harmonic exterior for Phi
                         yb[4] - sigma2])

    sol = solve_bvp(f, bc, r, y, p=[w2_guess], tol=1e-7, bc_tol=1e-10, max_nodes=300000)
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma2", type=float, default=None)
    ap.add_argument("--omega0", type=float, default=0.8)
    ap.add_argument("--q", type=float, nargs="+", default=[0.025, 0.05, 0.1])
    args = ap.parse_args()
    model = NonlinearityModel.saturable(1.0, 1.0)
    grid = RadialGrid()
    sh = solve_shooting(model, args.omega0, grid)
    sigma2 = args.sigma2 or 0.5 * float(np.dot(grid.weights, sh.u.values**2))
    print(f"shooting u0={sh.u0:.15g} sigma2={sigma2:.15g}")
    gr, gu, w2 = sh.u.r, sh.u.values, args.omega0**2
    for q in [0.0] + list(args.q):
        sol = coupled_bvp(model, q, sigma2, gr, gu, w2)
        w2 = float(sol.p[0])
        gr, gu = sol.x, sol.y[0]
        print(f"q={q:<6g} omega2={w2:.12g} u(0)={sol.y[0][0]:.10g} Phi(0)={sol.y[2][0]:.10g}")


if __name__ == "__main__":
    main()
