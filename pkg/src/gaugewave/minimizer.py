"""Minimize J on V_sigma = {Lambda(u) = sigma^2}; omega^2 is the Lagrange multiplier.

Each iteration takes a preconditioned gradient step tangent to the
constraint and returns to V_sigma by the dilation u -> lam u(lam x), under
which Lambda scales exactly as 1/lam in the continuum.  Step lengths come
from Armijo backtracking on J.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import scipy.linalg
import scipy.optimize

from .functionals import (
    derrick_pohozaev, eval_A, eval_energy_static, eval_J, grad_J, grad_Lambda_from_phi,
    lambda_from_phi,
)
from .gauge import GaugeSolve, gauge_residual, phi_bounds_check, phi_continuity_modulus, solve_phi
from .nonlinearity import NonlinearityModel
from .radial import (
    RadialField, RadialGrid, dirichlet_energy, inner, norm, rescale, stiffness_bands,
)
from .report import Check, Report


class EmptyRetractionError(ValueError):
    pass


class NoBoundStateError(RuntimeError):
    """The iteration spreads or its multiplier leaves (0, m0^2)."""

    def __init__(self, message: str, history: dict | None = None):
        super().__init__(message)
        self.history = history or {}


class DivergenceError(RuntimeError):
    def __init__(self, message: str, history: dict | None = None):
        super().__init__(message)
        self.history = history or {}


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, history: dict | None = None):
        super().__init__(message)
        self.history = history or {}


@dataclass
class SolverConfig:
    q: float = 0.0
    sigma2: float = 100.0
    n_points: int = 2000
    r_max: float = 50.0
    step0: float = 1.0
    step_policy: Literal["armijo_backtracking", "fixed"] = "armijo_backtracking"
    tol_residual: float = 1e-8
    max_iters: int = 20000
    seed_profile: Literal["gaussian", "compact_bump", "file"] = "gaussian"
    seed_path: str | None = None
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    spreading_drift: float = 1e3
    spreading_radius: float = 0.35
    window_patience: int = 300
    method: Literal["cg", "gradient"] = "cg"

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if not self.q >= 0:
            raise ValueError("q must be nonnegative")
        if self.step_policy not in ("armijo_backtracking", "fixed"):
            raise ValueError(f"unknown step policy {self.step_policy!r}")
        if self.method not in ("cg", "gradient"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.seed_profile not in ("gaussian", "compact_bump", "file"):
            raise ValueError(f"unknown seed profile {self.seed_profile!r}")
        if self.seed_profile == "file" and not self.seed_path:
            raise ValueError("seed_profile='file' needs seed_path")

    @property
    def grid(self) -> RadialGrid:
        return RadialGrid(self.n_points, self.r_max)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(eq=False)
class SolitaryWaveSolution:
    u: RadialField
    phi: RadialField
    omega2: float
    sigma2: float
    q: float
    J_value: float
    energy: float
    residual: float
    iterations: int
    omega2_pairing: float = float("nan")
    diagnostics: dict = field(default_factory=dict)
    history: dict = field(default_factory=dict, repr=False)


@dataclass(frozen=True)
class MultiplierEstimate:
    least_squares: float
    pairing: float


def seed_profile(kind: str, grid: RadialGrid, m0: float = 1.0, path: str | None = None) -> RadialField:
    r = grid.nodes
    if kind == "gaussian":
        vals = np.exp(-0.5 * (m0 * r) ** 2)
    elif kind == "compact_bump":
        # smooth bump supported in r < 1/m0
        x = np.clip(m0 * r, 0.0, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            vals = np.where(x < 1.0, np.exp(1.0 - 1.0 / np.maximum(1.0 - x**2, 1e-300)), 0.0)
    elif kind == "file":
        from .io import load_solution
        vals = load_solution(path).u(r)
    else:
        raise ValueError(f"unknown seed profile {kind!r}")
    vals = np.array(vals, dtype=float)
    vals[-1] = 0.0
    return grid.field(vals)


def _dilate(u: RadialField, lam: float) -> RadialField:
    v = rescale(u, lam, lam)
    return v.with_values(np.concatenate([v.values[:-1], [0.0]]))


def _retract(u: RadialField, q: float, sigma2: float, tol: float = 1e-12,
             max_iter: int = 8) -> tuple[RadialField, float, GaugeSolve]:
    """Return (u_lam, lam, Phi solve) with Lambda(u_lam) = sigma2."""
    if not np.any(u.values):
        raise EmptyRetractionError("empty retraction: u is identically zero")
    gs = solve_phi(u, q)
    lam_u = lambda_from_phi(u, gs.phi, q)
    if not lam_u > 0:
        raise EmptyRetractionError("empty retraction: Lambda(u) <= 0")
    if abs(lam_u - sigma2) <= tol * sigma2:
        return u, 1.0, gs

    def evaluate(lam):
        v = _dilate(u, lam)
        g = solve_phi(v, q)
        return v, g, lambda_from_phi(v, g.phi, q)

    # Lambda(u_lam) ~ Lambda(u) / lam: fixed point first, bracketed root as fallback
    lam = lam_u / sigma2
    for _ in range(max_iter):
        if not 1e-6 < lam < 1e6:
            break
        v, g, val = evaluate(lam)
        if abs(val - sigma2) <= tol * sigma2:
            return v, lam, g
        lam *= val / sigma2

    def f(log_lam):
        return math.log(evaluate(math.exp(log_lam))[2] / sigma2)

    x0 = math.log(lam_u / sigma2)
    lo, hi = x0 - 0.5, x0 + 0.5
    for _ in range(30):
        flo, fhi = f(lo), f(hi)
        if flo > 0 > fhi:
            break
        lo, hi = (lo - 0.5, hi) if flo <= 0 else (lo, hi + 0.5)
    else:
        raise EmptyRetractionError("retraction could not bracket the constraint")
    x = scipy.optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    lam = math.exp(x)
    v, g, val = evaluate(lam)
    if abs(val - sigma2) > 1e-10 * sigma2:
        raise EmptyRetractionError(
            f"retraction did not reach the constraint: |Lambda - sigma2|/sigma2 = "
            f"{abs(val - sigma2) / sigma2:.3g}")
    return v, lam, g


def retract_to_constraint(u: RadialField, q: float, sigma2: float) -> RadialField:
    """Dilate u -> lam u(lam x) so that Lambda = sigma2."""
    return _retract(u, q, sigma2)[0]


def multiplier_estimate(u: RadialField, q: float, model: NonlinearityModel,
                        phi: RadialField | None = None) -> MultiplierEstimate:
    """Least-squares <J', L'>/<L', L'> and pairing <J', u>/<L', u> estimates of omega^2."""
    if phi is None:
        phi = solve_phi(u, q).phi
    gJ = grad_J(u, model)
    gL = grad_Lambda_from_phi(u, phi, q)
    den = inner(gL, gL)
    if den == 0.0:
        raise ValueError("constraint gradient vanishes; multiplier undefined")
    ls = inner(gJ, gL) / den
    pairing = inner(gJ, u) / inner(gL, u)
    return MultiplierEstimate(float(ls), float(pairing))


def _preconditioner(grid: RadialGrid, shift: float):
    """Banded factor of (K + shift W) on the free nodes (Dirichlet at r_max)."""
    diag, off = stiffness_bands(grid, "dirichlet_zero")
    w = grid.weights
    d = diag[:-1] + shift * w[:-1]
    o = off[:-1]
    ab = np.zeros((2, d.size))
    ab[0, 1:] = o
    ab[1] = d
    cho = scipy.linalg.cholesky_banded(ab, lower=False)

    def apply(g: np.ndarray) -> np.ndarray:
        out = np.zeros_like(g)
        out[:-1] = scipy.linalg.cho_solve_banded((cho, False), w[:-1] * g[:-1])
        return out
    return apply


def _residual(gJ, gL, omega2, u):
    r = gJ - omega2 * gL
    return norm(r, "L2") / norm(u, "H1")


def radius_of_gyration(u: RadialField) -> float:
    w = u.grid.weights
    m = float(np.dot(w, u.values**2))
    if m == 0.0:
        return 0.0
    return math.sqrt(float(np.dot(w, u.r**2 * u.values**2)) / m)


def _normalize_amplitude(u: RadialField, q: float, sigma2: float) -> RadialField:
    """Scale the seed amplitude toward Lambda = sigma2 (exact at q = 0)."""
    for _ in range(20):
        val = lambda_from_phi(u, solve_phi(u, q).phi, q)
        if val <= 0 or abs(val - sigma2) <= 1e-3 * sigma2:
            break
        u = math.sqrt(sigma2 / val) * u
    return u


def _line_search(u, d, J, slope, t, q, sigma2, omega2, model, config, hist, it, res):
    """Armijo backtracking on J with a secant refinement of the first trial.

    Near convergence the decrease in J drops below rounding, so the trial step
    is first moved toward the zero of t -> <J'(u_t) - omega^2 L'(u_t), d>,
    which is well conditioned down to the solver tolerance.
    """
    eps_J = 64 * np.finfo(float).eps * abs(J)
    t = min(2.0 * t, 64.0 * config.step0)
    while True:
        try:
            trial, lam, gs_trial = _retract(u - t * d, q, sigma2)
            break
        except EmptyRetractionError:
            t *= config.backtrack
            if t < 1e-14:
                raise ConvergenceError(f"line search failed at iteration {it}", hist)
    s1 = inner(grad_J(trial, model) - omega2 * grad_Lambda_from_phi(trial, gs_trial.phi, q), d)
    if slope > 0 and slope - s1 > 0:
        t_sec = t * slope / (slope - s1)
        t_sec = min(max(t_sec, 0.1 * t), 10.0 * t)
        if t_sec != t:
            t = t_sec
            try:
                trial, lam, gs_trial = _retract(u - t * d, q, sigma2)
            except EmptyRetractionError:
                trial = None
    while True:
        if trial is not None:
            J_trial = eval_J(trial, model)
            if J_trial <= J - config.armijo_c * t * slope + eps_J:
                return t, trial, lam, gs_trial, J_trial
        t *= config.backtrack
        if t < 1e-14:
            raise ConvergenceError(
                f"line search failed at iteration {it} (residual {res:.3g})", hist)
        try:
            trial, lam, gs_trial = _retract(u - t * d, q, sigma2)
        except EmptyRetractionError:
            trial = None


def minimize(config: SolverConfig, model: NonlinearityModel,
             seed: RadialField | None = None, callback=None) -> SolitaryWaveSolution:
    """Constrained descent of J on V_sigma; see module docstring."""
    grid = config.grid
    q, sigma2 = float(config.q), float(config.sigma2)
    m0sq = model.m0**2
    if seed is None:
        seed = seed_profile(config.seed_profile, grid, model.m0, config.seed_path)
    elif seed.grid != grid:
        seed = grid.field(seed(grid.nodes))
    u, lam, gs = _retract(_normalize_amplitude(seed, q, sigma2), q, sigma2)
    drift = lam
    precond = _preconditioner(grid, m0sq)

    hist = {"J": [], "residual": [], "omega2": [], "step": [], "lambda": [], "rg": [],
            "rayleigh": [], "constraint": []}
    J = eval_J(u, model)
    t = config.step0
    rising = 0
    above_window = 0
    prev = None

    for it in range(config.max_iters + 1):
        phi = gs.phi
        gJ = grad_J(u, model)
        gL = grad_Lambda_from_phi(u, phi, q)
        omega2 = inner(gJ, gL) / inner(gL, gL)
        res = _residual(gJ, gL, omega2, u)
        rg = radius_of_gyration(u)
        hist["J"].append(J)
        hist["residual"].append(res)
        hist["omega2"].append(omega2)
        hist["rg"].append(rg)
        hist["rayleigh"].append(J / sigma2)
        if callback is not None:
            callback(it, u, J, res, omega2)

        if rg > config.spreading_radius * grid.r_max or not (
                1.0 / config.spreading_drift < drift < config.spreading_drift):
            raise NoBoundStateError(
                f"no bound state at (q={q:g}, sigma2={sigma2:g}): profile spreads "
                f"(radius of gyration {rg:.3g}, dilation drift {drift:.3g})", hist)
        above_window = above_window + 1 if omega2 >= m0sq else 0
        if above_window >= config.window_patience:
            raise NoBoundStateError(
                f"no bound state at (q={q:g}, sigma2={sigma2:g}): multiplier "
                f"{omega2:.6g} >= m0^2 for {above_window} iterations", hist)
        if res <= config.tol_residual:
            break
        if it == config.max_iters:
            raise ConvergenceError(
                f"max_iters={config.max_iters} reached with residual {res:.3g}", hist)

        w = grid.weights
        pJ = precond(gJ.values)
        pL = precond(gL.values)
        mu = float(np.dot(w, gL.values * pJ) / np.dot(w, gL.values * pL))
        pg = pJ - mu * pL                      # preconditioned tangent gradient
        g = gJ.values - mu * gL.values
        gpg = float(np.dot(w, g * pg))
        if config.method == "cg" and prev is not None:
            beta = max(0.0, (gpg - float(np.dot(w, g * prev[1]))) / prev[0])
            dv = pg + beta * prev[2]
            dv -= float(np.dot(w, gL.values * dv)) / float(np.dot(w, gL.values * pL)) * pL
            if float(np.dot(w, gJ.values * dv)) <= 0.0:
                dv = pg
        else:
            dv = pg
        prev = (gpg, pg, dv)
        d = u.with_values(dv)
        slope = max(inner(gJ, d), 0.0)

        if config.step_policy == "fixed":
            t = config.step0
            trial, lam, gs_trial = _retract(u - t * d, q, sigma2)
            J_trial = eval_J(trial, model)
        else:
            t, trial, lam, gs_trial, J_trial = _line_search(
                u, d, J, slope, t, q, sigma2, omega2, model, config, hist, it, res)
        rising = rising + 1 if J_trial > J else 0
        if rising >= 50:
            raise DivergenceError("J increased across 50 consecutive accepted steps", hist)
        hist["step"].append(t)
        hist["lambda"].append(lam)
        hist["constraint"].append(abs(lambda_from_phi(trial, gs_trial.phi, q) - sigma2) / sigma2)
        drift *= lam
        u, gs, J = trial, gs_trial, J_trial

    est_pairing = inner(gJ, u) / inner(gL, u)
    total, _ = eval_energy_static(u, gs, math.sqrt(max(omega2, 0.0)), model)
    sol = SolitaryWaveSolution(
        u=u, phi=gs.phi, omega2=float(omega2), sigma2=sigma2, q=q, J_value=float(J),
        energy=float(total), residual=float(res), iterations=it,
        omega2_pairing=float(est_pairing), history=hist,
    )
    if not 0.0 < omega2 < m0sq:
        raise NoBoundStateError(
            f"no bound state at (q={q:g}, sigma2={sigma2:g}): converged multiplier "
            f"omega^2={omega2:.6g} outside (0, m0^2={m0sq:g})", hist)
    sol.diagnostics = verify_solution(sol, model, q, config.tol_residual).as_dict()
    return sol


def minimize_unconstrained(u: RadialField, model: NonlinearityModel, max_iters: int = 2000,
                           tol: float = 1e-10) -> dict:
    """Preconditioned descent of J alone (omega forced to 0).

    With W >= 0 the only static critical point is u = 0; the trace records the
    H1 norm and radius of gyration so callers can see collapse or spreading.
    """
    grid = u.grid
    precond = _preconditioner(grid, model.m0**2)
    J = eval_J(u, model)
    t = 1.0
    trace = {"J": [J], "H1": [norm(u, "H1")], "rg": [radius_of_gyration(u)]}
    for _ in range(max_iters):
        g = grad_J(u, model)
        d = u.with_values(precond(g.values))
        slope = inner(g, d)
        if slope <= tol**2:
            break
        t = min(2 * t, 64.0)
        while True:
            trial = u - t * d
            Jt = eval_J(trial, model)
            if Jt <= J - 1e-4 * t * slope:
                break
            t *= 0.5
            if t < 1e-14:
                return trace
        u, J = trial, Jt
        trace["J"].append(J)
        trace["H1"].append(norm(u, "H1"))
        trace["rg"].append(radius_of_gyration(u) if np.any(u.values) else 0.0)
        if trace["H1"][-1] <= tol * trace["H1"][0]:
            break
    trace["u"] = u
    return trace


def verify_solution(sol: SolitaryWaveSolution, model: NonlinearityModel, q: float,
                    tol_residual: float = 1e-8) -> Report:
    """Recompute residuals and structural checks for a stored solution."""
    rep = Report()
    u = sol.u
    omega2 = sol.omega2
    nontrivial = bool(np.any(u.values))
    gs = solve_phi(u, q)
    phi = gs.phi
    m0sq = model.m0**2

    lam = lambda_from_phi(u, phi, q)
    rel = abs(lam - sol.sigma2) / sol.sigma2
    rep.add(Check("constraint", rel <= 1e-8, rel, 1e-8, "|Lambda(u) - sigma2| / sigma2"))

    if nontrivial:
        gJ = grad_J(u, model)
        gL = grad_Lambda_from_phi(u, phi, q)
        res = _residual(gJ, gL, omega2, u)
    else:
        res = float("inf")
    lim = tol_residual * (1.0 + 1e-6)
    rep.add(Check("residual_matter", res <= lim, res, lim,
                  "||-Lap u + W'(u) - omega^2 (1 - q Phi)^2 u|| / ||u||_H1"))

    phi_scale = max(norm(u * u, "L2") * q, 1e-300)
    gres = gs.residual_norm / phi_scale if q > 0 else 0.0
    stored = norm(phi - sol.phi, "L2") / max(norm(phi, "L2"), 1e-300) if q > 0 else norm(sol.phi, "L2")
    rep.add(Check("residual_gauge", gres <= 1e-10 and stored <= 1e-10, max(gres, stored), 1e-10,
                  "gauge equation residual and agreement with stored Phi"))

    if q > 0 and nontrivial:
        b = phi_bounds_check(gs)
        rep.add(Check("phi_bounds", b.passed, b["phi_upper"].value, 1.0 / q, "0 <= Phi <= 1/q"))
    else:
        rep.add(Check("phi_bounds", True, 0.0, None, "q = 0: Phi = 0"))

    rep.add(Check("multiplier_window", 0.0 < omega2 < m0sq, omega2, m0sq, "0 < omega^2 < m0^2"))

    if nontrivial:
        total, dens = eval_energy_static(u, gs, math.sqrt(max(omega2, 0.0)), model)
        dmin = float(dens.values.min())
        rep.add(Check("energy_positive", dmin >= -1e-12 and total > 0, dmin, 0.0,
                      f"total energy {total:.10g}"))
        J = eval_J(u, model)
        dp_W, dp_G = derrick_pohozaev(u, model, omega2)
        rep.add(Check("derrick_W_positive", dp_W > 0, dp_W, 0.0, "1/6|grad u|^2 + W > 0"))
        if q == 0:
            rep.add(Check("pohozaev_G", abs(dp_G) <= 1e-3 * J, abs(dp_G) / J, 1e-3,
                          "|dp_G| / J at q = 0"))
        else:
            rep.add(Check("pohozaev_G", True, dp_G / J, None, "diagnostic only for q > 0"))
        tail = abs(float(u.values[-2])) / max(float(np.abs(u.values).max()), 1e-300)
        rep.add(Check("boundary_residue_u", tail <= 1e-6, tail, 1e-6, "|u(r_max-)| / max|u|"))
        rep.add(Check("boundary_residue_phi", True, float(phi.values[-1]), None,
                      "Phi(r_max), continued harmonically"))
        rep.add(Check("phi_continuity", True, phi_continuity_modulus(u, q), None,
                      "||dPhi||_D / ||du||_H1, measured locally"))
    else:
        rep.add(Check("energy_positive", False, 0.0, 0.0, "trivial u"))
    return rep
