"""Shooting/bisection ground state of -Lap u + W'(u) = omega0^2 u (radial, q = 0).

Independent of the finite-difference machinery: the radial ODE
u'' + (2/r) u' = G'(u), G(u) = W(u) - omega0^2 u^2 / 2, is integrated with an
adaptive eighth-order Runge-Kutta scheme and u(0) is bisected between
undershoot (u' returns to zero while u > 0) and overshoot (u crosses zero).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .nonlinearity import NonlinearityModel, frequency_window
from .radial import RadialField, RadialGrid


class NoGroundStateError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ShootingResult:
    u: RadialField
    u0: float
    omega0: float
    residual: float
    r_cut: float


def _rhs(model, omega2):
    def f(r, y):
        u, du = y
        return [du, model.dW(u) - omega2 * u - 2.0 * du / r]
    return f


def _shoot(model, omega2, u0, r_end, r_start=1e-6, dense=False):
    g0 = float(model.dW(u0)) - omega2 * u0
    y0 = [u0 + g0 * r_start**2 / 6.0, g0 * r_start / 3.0]

    def cross(r, y):
        return y[0]
    cross.terminal = True
    cross.direction = -1

    def turn(r, y):
        return y[1]
    turn.terminal = True
    turn.direction = 1

    sol = solve_ivp(_rhs(model, omega2), (r_start, r_end), y0, method="DOP853",
                    rtol=1e-12, atol=1e-15, events=(cross, turn), dense_output=dense)
    if sol.t_events[0].size:
        return +1, sol
    if sol.t_events[1].size:
        return -1, sol
    return 0, sol


def solve_shooting(model: NonlinearityModel, omega0: float, grid: RadialGrid,
                   max_bisections: int = 200) -> ShootingResult:
    """Positive, decreasing, decaying radial solution at frequency omega0."""
    m1, m0 = frequency_window(model)
    if not (m1 < omega0 < m0):
        raise ValueError(f"omega0={omega0} outside frequency window ({m1:.6g}, {m0:.6g})")
    omega2 = omega0**2
    kappa = np.sqrt(m0**2 - omega2)

    def G(s):
        return float(model.W(s)) - 0.5 * omega2 * s * s

    # first positive zero of G: below it the particle cannot reach the origin
    hi = 1.0
    while G(hi) >= 0:
        hi *= 2.0
        if hi > 1e8:
            raise NoGroundStateError("G stays nonnegative; no ground state detected")
    lo = hi / 2.0 if G(hi / 2.0) > 0 else 1e-12
    u_turn = brentq(G, lo, hi, xtol=1e-15, rtol=1e-15)

    r_end = grid.r_max
    a = u_turn * (1.0 + 1e-12)
    kind_a, _ = _shoot(model, omega2, a, r_end)
    b = 2.0 * u_turn
    for _ in range(80):
        kind_b, _ = _shoot(model, omega2, b, r_end)
        if kind_b == +1:
            break
        b *= 1.5
    else:
        raise NoGroundStateError("no overshoot found; no ground state detected")
    if kind_a == +1:
        raise NoGroundStateError("no sign change in bisection bracket")

    for _ in range(max_bisections):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        kind, _ = _shoot(model, omega2, mid, r_end)
        if kind == +1:
            b = mid
        else:
            a = mid

    u0 = a
    _, sol = _shoot(model, omega2, u0, r_end, dense=True)
    t_end = sol.t[-1]
    rr = np.linspace(sol.t[0], t_end, 20001)
    uu = sol.sol(rr)[0]
    # trust the trajectory until it has decayed by 1e-7 or is about to turn
    small = np.flatnonzero(uu <= 1e-7 * u0)
    r_cut = rr[small[0]] if small.size else 0.8 * t_end
    r_cut = min(r_cut, 0.9 * t_end)

    r = grid.nodes
    vals = np.empty_like(r)
    inside = r <= r_cut
    vals[inside] = sol.sol(r[inside])[0]
    u_cut = float(sol.sol(r_cut)[0])
    out = r[~inside]
    vals[~inside] = u_cut * (r_cut / out) * np.exp(-kappa * (out - r_cut))
    vals[-1] = 0.0
    field = grid.field(vals)

    res = _ode_residual(sol, model, omega2, r_cut)
    return ShootingResult(field, float(u0), float(omega0), res, float(r_cut))


def _ode_residual(sol, model, omega2, r_cut, delta=1e-4):
    """Volume L2 norm of u'' + 2u'/r - G'(u) along the dense trajectory."""
    r = np.linspace(max(sol.t[0], 10 * delta), r_cut - delta, 4001)
    y = sol.sol(r)
    d2 = (sol.sol(r + delta)[1] - sol.sol(r - delta)[1]) / (2 * delta)
    res = d2 + 2.0 * y[1] / r - (model.dW(y[0]) - omega2 * y[0])
    return float(np.sqrt(4 * np.pi * np.trapezoid(res**2 * r**2, r)))
