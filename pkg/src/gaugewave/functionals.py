"""Action, charge-like constraint, energy and Derrick-Pohozaev functionals.

Gradients are strong-form fields paired through the volume pairing
``radial.inner``; they are the exact gradients of the discrete functionals,
so central differences of the functionals reproduce them to rounding.

The constraint gradient is u (1 - q Phi(u))^2.  Differentiating
Lambda(u) = A(u, Phi(u)) only through its explicit u-dependence (the
Phi-derivative of A vanishes at Phi(u)) gives the squared factor, which is
also the factor in the coupled matter equation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gauge import GaugeSolve, solve_phi
from .nonlinearity import NonlinearityModel
from .radial import RadialField, dirichlet_energy, inner, radial_laplacian


@dataclass(frozen=True)
class FunctionalValue:
    J: float
    A: float
    Lambda: float
    I_omega: float
    omega2: float


@dataclass(frozen=True, eq=False)
class GradientPair:
    dJ: RadialField
    dLambda: RadialField


def _interior(f: RadialField) -> RadialField:
    """Zero the fixed Dirichlet boundary node of a gradient field."""
    v = np.array(f.values)
    v[-1] = 0.0
    return f.with_values(v)


def eval_J(u: RadialField, model: NonlinearityModel) -> float:
    """1/2 int |grad u|^2 + int W(u)."""
    return 0.5 * dirichlet_energy(u) + float(np.dot(u.grid.weights, model.W(u.values)))


def eval_A(u: RadialField, phi: RadialField, q: float) -> float:
    """1/2 int |grad Phi|^2 + 1/2 int u^2 (1 - q Phi)^2."""
    w = u.grid.weights
    return 0.5 * dirichlet_energy(phi) + 0.5 * float(
        np.dot(w, u.values**2 * (1.0 - q * phi.values) ** 2)
    )


def lambda_from_phi(u: RadialField, phi: RadialField, q: float) -> float:
    return 0.5 * float(np.dot(u.grid.weights, u.values**2 * (1.0 - q * phi.values)))


def eval_Lambda(u: RadialField, q: float) -> float:
    """1/2 int u^2 (1 - q Phi(u))."""
    return lambda_from_phi(u, solve_phi(u, q).phi, q)


def eval_functionals(u: RadialField, model: NonlinearityModel, q: float,
                     omega2: float) -> FunctionalValue:
    phi = solve_phi(u, q).phi
    J = eval_J(u, model)
    lam = lambda_from_phi(u, phi, q)
    return FunctionalValue(J=J, A=eval_A(u, phi, q), Lambda=lam,
                           I_omega=J - omega2 * lam, omega2=float(omega2))


def grad_J(u: RadialField, model: NonlinearityModel) -> RadialField:
    """-Lap u + W'(u) on the free nodes (boundary node held at zero)."""
    lap = radial_laplacian(u)
    return _interior(u.with_values(-lap.values + model.dW(u.values)))


def grad_Lambda_from_phi(u: RadialField, phi: RadialField, q: float) -> RadialField:
    return _interior(u.with_values(u.values * (1.0 - q * phi.values) ** 2))


def grad_Lambda(u: RadialField, q: float) -> RadialField:
    """u (1 - q Phi(u))^2."""
    return grad_Lambda_from_phi(u, solve_phi(u, q).phi, q)


def gradients(u: RadialField, model: NonlinearityModel, q: float) -> GradientPair:
    return GradientPair(grad_J(u, model), grad_Lambda(u, q))


def eval_energy_static(u: RadialField, phi_solution: GaugeSolve, omega: float,
                       model: NonlinearityModel) -> tuple[float, RadialField]:
    """Field energy of the standing wave u e^{-i omega t}, phi = omega Phi.

    Density: 1/2 |u'|^2 + W(u) + 1/2 omega^2 u^2 (1 - q Phi)^2 + 1/2 omega^2 |Phi'|^2.
    The total equals J(u) + omega^2 A(u, Phi) and includes the Coulomb
    energy of the harmonic continuation of Phi past r_max.
    """
    q = phi_solution.q
    phi = phi_solution.phi
    grid = u.grid
    w2 = omega**2
    du = _node_gradient(u)
    dphi = _node_gradient(phi)
    dens = (0.5 * du**2 + model.W(u.values)
            + 0.5 * w2 * u.values**2 * (1.0 - q * phi.values) ** 2 + 0.5 * w2 * dphi**2)
    total = eval_J(u, model) + w2 * eval_A(u, phi, q)
    return float(total), grid.field(dens)


def _node_gradient(f: RadialField) -> np.ndarray:
    """f'(r_i) from the cubic interpolant (used for pointwise densities only)."""
    return f(f.grid.nodes, 1)


def derrick_pohozaev(u: RadialField, model: NonlinearityModel,
                     omega2: float) -> tuple[float, float]:
    """(1/6 int|grad u|^2 + int W(u),  1/6 int|grad u|^2 + int (W(u) - omega2 u^2 / 2))."""
    w = u.grid.weights
    grad_part = dirichlet_energy(u) / 6.0
    W_part = float(np.dot(w, model.W(u.values)))
    mass = float(np.dot(w, u.values**2))
    return grad_part + W_part, grad_part + W_part - 0.5 * omega2 * mass


def directional_derivative(func, u: RadialField, v: RadialField, eps: float = 1e-5) -> float:
    """Central difference (F(u + eps v) - F(u - eps v)) / (2 eps)."""
    return (func(u + eps * v) - func(u - eps * v)) / (2.0 * eps)


__all__ = [
    "FunctionalValue", "GradientPair", "eval_J", "eval_A", "eval_Lambda", "eval_functionals",
    "grad_J", "grad_Lambda", "grad_Lambda_from_phi", "gradients", "eval_energy_static",
    "derrick_pohozaev", "lambda_from_phi", "directional_derivative", "inner",
]
