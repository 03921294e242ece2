"""The gauge-field map u -> Phi(u), solving -Lap Phi + q^2 u^2 Phi = q u^2.

Phi is continued past r_max by its exterior harmonic extension
Phi(r_max) r_max / r, i.e. the discrete problem carries the exact
exterior Dirichlet-to-Neumann condition.  Because u is (numerically) zero
there, this is exact up to the decay of u, and the scaling law
Phi(u_lam)(x) = Phi(u)(lam x) holds up to O(h^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .radial import RadialField, norm, radial_laplacian, stiffness_bands, rescale
from .report import Check, Report


class GaugeSolveError(RuntimeError):
    """Factorization breakdown in the gauge-field solve."""


@dataclass(frozen=True, eq=False)
class GaugeSolve:
    phi: RadialField
    q: float
    residual_norm: float
    iterations: int = 1


def gauge_system(u: RadialField, q: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symmetric tridiagonal system (diag, off, rhs) of the weighted gauge equation."""
    grid = u.grid
    w = grid.weights
    u2 = u.values**2
    diag, off = stiffness_bands(grid, "exterior_harmonic")
    diag = diag + w * q**2 * u2
    rhs = w * q * u2
    return diag, off, rhs


def gauge_residual(phi: RadialField, u: RadialField, q: float) -> RadialField:
    """Strong residual -Lap Phi + q^2 u^2 Phi - q u^2, node by node."""
    lap = radial_laplacian(phi)
    u2 = u.values**2
    return phi.with_values(-lap.values + q**2 * u2 * phi.values - q * u2)


def solve_phi(u: RadialField, q: float) -> GaugeSolve:
    """Direct solve of the gauge equation; q = 0 gives Phi = 0."""
    if not q >= 0:
        raise ValueError(f"coupling q must be nonnegative, got {q}")
    grid = u.grid
    if q == 0.0 or not np.any(u.values):
        phi = grid.zeros("exterior_harmonic")
        return GaugeSolve(phi, float(q), 0.0, 1)
    diag, off, rhs = gauge_system(u, q)
    ab = np.zeros((2, grid.n_points))
    ab[0, 1:] = off
    ab[1] = diag
    try:
        vals = scipy.linalg.solveh_banded(ab, rhs, lower=False, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise GaugeSolveError(f"gauge-field factorization failed: {exc}") from exc
    phi = grid.field(vals, "exterior_harmonic")
    res = norm(gauge_residual(phi, u, q), "L2")
    return GaugeSolve(phi, float(q), res, 1)


def phi_bounds_check(gs: GaugeSolve, tol: float = 1e-8) -> Report:
    """0 <= Phi <= 1/q up to ``tol`` (maximum principle)."""
    if not gs.q > 0:
        raise ValueError("phi_bounds_check needs q > 0")
    v = gs.phi.values
    r = gs.phi.r
    lo, hi = float(v.min()), float(v.max())
    upper = 1.0 / gs.q
    rep = Report()
    i_lo, i_hi = int(np.argmin(v)), int(np.argmax(v))
    rep.add(Check("phi_lower", lo >= -tol, lo, -tol,
                  "" if lo >= -tol else f"min at r={r[i_lo]:.6g}"))
    rep.add(Check("phi_upper", hi <= upper + tol, hi, upper + tol,
                  "" if hi <= upper + tol else f"max at r={r[i_hi]:.6g}"))
    rep.add(Check("phi_boundary_residue", True, float(v[-1]), None,
                  f"monopole charge {float(v[-1] * gs.phi.grid.r_max):.6g}"))
    return rep


def phi_scaling_check(u: RadialField, q: float, lam: float) -> Report:
    """Compare Phi(u_lam) with Phi(u)(lam x), u_lam(x) = lam u(lam x)."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    u_lam = rescale(u, lam, lam)
    phi = solve_phi(u, q).phi
    phi_lam = solve_phi(u_lam, q).phi
    expected = rescale(phi, lam)
    diff = norm(phi_lam - expected, "L2")
    scale = norm(expected, "L2")
    rel = diff / scale if scale > 0 else diff
    rep = Report()
    rep.add(Check("phi_scaling_L2", True, float(rel), None, f"lambda={lam:g}"))
    diff_d = norm(phi_lam - expected, "D")
    scale_d = norm(expected, "D")
    rep.add(Check("phi_scaling_D", True, float(diff_d / scale_d if scale_d > 0 else diff_d),
                  None, f"lambda={lam:g}"))
    return rep


def phi_smallq_check(u: RadialField, q_list) -> dict:
    """Small-coupling laws ||Phi_q||_D / q -> const and q int u^2 Phi_q = O(q^2)."""
    q_list = [float(q) for q in q_list]
    if not q_list:
        raise ValueError("q_list must not be empty")
    u2 = u * u
    rows = []
    for q in q_list:
        phi = solve_phi(u, q).phi
        d_ratio = norm(phi, "D") / q if q > 0 else 0.0
        coupling = q * float(np.dot(u.grid.weights, u2.values * phi.values))
        rows.append({"q": q, "d_ratio": d_ratio, "coupling": coupling})
    ratios = np.array([r["d_ratio"] for r in rows])
    spread = float((ratios.max() - ratios.min()) / ratios.max()) if ratios.max() > 0 else 0.0
    return {"rows": rows, "d_ratio_spread": spread}


def phi_continuity_modulus(u: RadialField, q: float, rel_step: float = 1e-4,
                           n_dirs: int = 3) -> float:
    """Largest ||Phi(u + d) - Phi(u)||_D / ||d||_H1 over a few deterministic smooth directions.

    An empirical local modulus of continuity of u -> Phi(u); the directions are
    Gaussian bumps of widths 1, 2, 4 scaled to rel_step ||u||_H1.
    """
    if not q > 0:
        return 0.0
    un = norm(u, "H1")
    if un == 0.0:
        return 0.0
    base = solve_phi(u, q).phi
    r = u.grid.nodes
    worst = 0.0
    for k in range(n_dirs):
        vals = np.exp(-(r / 2.0**k) ** 2)
        vals[-1] = 0.0
        d = u.grid.field(vals)
        d = d * (rel_step * un / norm(d, "H1"))
        diff = solve_phi(u + d, q).phi - base
        worst = max(worst, norm(diff, "D") / norm(d, "H1"))
    return float(worst)

