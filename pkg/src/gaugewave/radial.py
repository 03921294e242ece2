"""Radial grid, volume quadrature and finite-difference operators.

Fields are radial functions on R^3 sampled at r_i = i*h, i = 1..n, with
h = r_max / n.  The origin is not a node: even symmetry makes the edge
coefficient between the origin and r_1 vanish (r_0 * r_1 = 0), so the
innermost stencil needs no ghost value.

All volume integrals use trapezoid weights w_i = 4 pi h r_i^2 (half weight
at r_max).  The Dirichlet energy uses midpoint differences with coefficients
4 pi r_i r_{i+1} / h.  With these choices the discrete Laplacian is exactly
self-adjoint in the weighted pairing and is exactly the gradient of half the
Dirichlet energy, which the constrained solver relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
from scipy.interpolate import CubicSpline

InnerBC = Literal["even"]
OuterBC = Literal["dirichlet_zero", "exterior_harmonic"]

NORMS = ("L2", "L3", "L6", "L12_5", "D", "H1")


class NonFiniteFieldError(ValueError):
    """Raised when a field carries NaN or infinite samples."""

    def __init__(self, index: int, value: float):
        super().__init__(f"non-finite field value {value!r} at node index {index}")
        self.index = index
        self.value = value


@dataclass(frozen=True)
class RadialGrid:
    n_points: int = 2000
    r_max: float = 50.0

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 16:
            raise ValueError(f"n_points must be an integer >= 16, got {self.n_points}")
        if not (np.isfinite(self.r_max) and self.r_max > 0):
            raise ValueError(f"r_max must be positive, got {self.r_max}")

    @property
    def spacing(self) -> float:
        return self.r_max / self.n_points

    @cached_property
    def nodes(self) -> np.ndarray:
        r = self.spacing * np.arange(1, self.n_points + 1, dtype=float)
        r[-1] = self.r_max
        r.flags.writeable = False
        return r

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid weights of 4 pi r^2 dr; integrand at r = 0 carries zero weight."""
        w = 4.0 * np.pi * self.spacing * self.nodes**2
        w[-1] *= 0.5
        w.flags.writeable = False
        return w

    @cached_property
    def edge_coefficients(self) -> np.ndarray:
        """c_i = 4 pi r_i r_{i+1} / h for the edge (i, i+1), i = 1..n-1."""
        r = self.nodes
        c = 4.0 * np.pi * r[:-1] * r[1:] / self.spacing
        c.flags.writeable = False
        return c

    def refined(self, factor: int = 2) -> "RadialGrid":
        return RadialGrid(self.n_points * factor, self.r_max)

    def field(self, values, outer_bc: OuterBC = "dirichlet_zero") -> "RadialField":
        return RadialField(self, np.asarray(values, dtype=float), outer_bc=outer_bc)

    def sample(self, func, outer_bc: OuterBC = "dirichlet_zero") -> "RadialField":
        """Field with values func(r) at the nodes."""
        return self.field(func(self.nodes), outer_bc=outer_bc)

    def zeros(self, outer_bc: OuterBC = "dirichlet_zero") -> "RadialField":
        return self.field(np.zeros(self.n_points), outer_bc=outer_bc)


@dataclass(frozen=True, eq=False)
class RadialField:
    """A real radial function sampled on a RadialGrid.

    ``outer_bc`` says how the field continues past r_max: ``dirichlet_zero``
    (the field vanishes there) or ``exterior_harmonic`` (continues as
    f(r_max) r_max / r, the decaying harmonic extension).
    """

    grid: RadialGrid
    values: np.ndarray
    inner_bc: InnerBC = "even"
    outer_bc: OuterBC = "dirichlet_zero"

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.n_points,):
            raise ValueError(
                f"field has shape {vals.shape}, grid expects ({self.grid.n_points},)"
            )
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            raise NonFiniteFieldError(int(bad[0]), float(vals[bad[0]]))
        if self.outer_bc not in ("dirichlet_zero", "exterior_harmonic"):
            raise ValueError(f"unknown outer boundary condition {self.outer_bc!r}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values) -> "RadialField":
        return RadialField(self.grid, values, self.inner_bc, self.outer_bc)

    def __add__(self, other):
        return self.with_values(self.values + _vals(other))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other))

    def __mul__(self, other):
        return self.with_values(self.values * _vals(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    @cached_property
    def _spline(self) -> CubicSpline:
        r = self.grid.nodes
        x = np.concatenate([-r[::-1], r])
        y = np.concatenate([self.values[::-1], self.values])
        return CubicSpline(x, y)

    def origin_value(self) -> float:
        """Even extrapolation f(0) = (4 f(h) - f(2h)) / 3."""
        return (4.0 * self.values[0] - self.values[1]) / 3.0

    def __call__(self, r, derivative: int = 0) -> np.ndarray:
        """Cubic interpolation in r, continued past r_max per ``outer_bc``."""
        r = np.abs(np.asarray(r, dtype=float))
        R = self.grid.r_max
        inside = r <= R
        out = np.zeros_like(r)
        out[inside] = self._spline(r[inside], derivative)
        if self.outer_bc == "exterior_harmonic":
            ro = r[~inside]
            fR = self.values[-1]
            if derivative == 0:
                out[~inside] = fR * R / ro
            elif derivative == 1:
                out[~inside] = -fR * R / ro**2
            elif derivative == 2:
                out[~inside] = 2.0 * fR * R / ro**3
            else:
                raise ValueError("derivative order above 2 not supported")
        return out


def _vals(x):
    return x.values if isinstance(x, RadialField) else x


def inner(f, g, grid: RadialGrid | None = None) -> float:
    """Volume pairing <f, g> = integral of f g over R^3 (trapezoid in r)."""
    grid = grid or (f.grid if isinstance(f, RadialField) else g.grid)
    return float(np.dot(grid.weights * _vals(f), _vals(g)))


def integrate_volume(f: RadialField) -> float:
    """4 pi * integral_0^r_max f(r) r^2 dr by the composite trapezoid rule."""
    vals = np.asarray(f.values, dtype=float)
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        raise NonFiniteFieldError(int(bad[0]), float(vals[bad[0]]))
    return float(np.dot(f.grid.weights, vals))


def stiffness_bands(grid: RadialGrid, outer_bc: OuterBC) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and super-diagonal of K with f.K.f = ||f||_D^2.

    For ``dirichlet_zero`` the last row/column belongs to the fixed boundary
    value and is returned as the identity so the matrix stays regular.
    """
    c = grid.edge_coefficients
    n = grid.n_points
    diag = np.zeros(n)
    diag[:-1] += c
    diag[1:] += c
    off = -c.copy()
    if outer_bc == "exterior_harmonic":
        diag[-1] += 4.0 * np.pi * grid.r_max
    else:
        diag[-1] = 1.0
        off[-1] = 0.0
    return diag, off


def dirichlet_energy(f: RadialField) -> float:
    """||f||_D^2 = integral |grad f|^2 over R^3, midpoint differences.

    For ``exterior_harmonic`` fields the energy of the harmonic continuation
    beyond r_max, 4 pi r_max f(r_max)^2, is included.
    """
    v = f.values
    e = float(np.dot(f.grid.edge_coefficients, np.diff(v) ** 2))
    if f.outer_bc == "exterior_harmonic":
        e += 4.0 * np.pi * f.grid.r_max * v[-1] ** 2
    return e


def radial_laplacian(f: RadialField) -> RadialField:
    """f'' + (2/r) f' with the weighted-symmetric three-point stencil.

    Interior rows are the standard centred stencil.  At r_1 the coefficient
    of the (even) origin value vanishes identically.  The outer node follows
    the field's boundary condition: odd reflection about r_max for
    ``dirichlet_zero``, the exterior-harmonic flux for ``exterior_harmonic``.
    """
    grid = f.grid
    if grid.n_points < 3:
        raise ValueError("radial_laplacian needs at least 3 nodes")
    v = f.values
    c = grid.edge_coefficients
    flux = c * np.diff(v)
    lap = np.zeros_like(v)
    lap[:-1] += flux
    lap[1:] -= flux
    w = grid.weights
    out = np.empty_like(v)
    out[:-1] = lap[:-1] / w[:-1]
    if f.outer_bc == "exterior_harmonic":
        out[-1] = (lap[-1] - 4.0 * np.pi * grid.r_max * v[-1]) / w[-1]
    else:
        h, R = grid.spacing, grid.r_max
        out[-1] = (-2.0 * (h / R) * v[-2] - 2.0 * v[-1]) / h**2
    return f.with_values(out)


def norm(f: RadialField, which: str = "L2") -> float:
    """L^p (p = 2, 3, 6, 12/5), D (gradient L^2) or H^1 norm of a radial field."""
    if which not in NORMS:
        raise ValueError(f"unknown norm {which!r}; expected one of {NORMS}")
    if which == "D":
        return float(np.sqrt(dirichlet_energy(f)))
    if which == "H1":
        return float(np.sqrt(integrate_volume(f * f) + dirichlet_energy(f)))
    p = {"L2": 2.0, "L3": 3.0, "L6": 6.0, "L12_5": 12.0 / 5.0}[which]
    return float(integrate_volume(f.with_values(np.abs(f.values) ** p)) ** (1.0 / p))


def rescale(f: RadialField, factor: float, amplitude: float = 1.0) -> RadialField:
    """Resample amplitude * f(factor * r) onto the same grid (cubic in r)."""
    if not factor > 0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    if factor == 1.0:
        return f.with_values(amplitude * f.values)
    return f.with_values(amplitude * f(factor * f.grid.nodes))
