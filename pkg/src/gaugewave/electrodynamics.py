"""Cartesian field reconstruction, Lorentz boosts and Maxwell/matter residuals.

Arrays are indexed [i3, i2, i1] so that x1 is the fastest (last) axis in C
order; vector fields carry a leading component axis (x1, x2, x3).  Spatial
derivatives are second-order centred differences (np.gradient), time
derivatives of the potentials are analytic (chain rule through t', x'), and
time derivatives of the reconstructed fields are taken between frames.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .minimizer import SolitaryWaveSolution
from .nonlinearity import NonlinearityModel
from .report import Check, Report

# residuals below this multiple of their term scale count as exact
EXACT_REL = 1e-11
FRAME_FORMAT = "gaugewave-frame/1"
AXIS_ORDER = "[x3, x2, x1] (x1 fastest); vectors [component, x3, x2, x1]"


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class CartesianGrid:
    n_per_axis: int
    half_width: float

    def __post_init__(self):
        if self.n_per_axis < 16:
            raise ValueError(f"n_per_axis must be >= 16, got {self.n_per_axis}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n_per_axis - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_per_axis)

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(X1, X2, X3), each of shape (n, n, n) in [i3, i2, i1] order."""
        a = self.axis
        X3, X2, X1 = np.meshgrid(a, a, a, indexing="ij")
        return X1, X2, X3

    def refined(self) -> "CartesianGrid":
        return CartesianGrid(2 * self.n_per_axis, self.half_width)


@dataclass(frozen=True, eq=False)
class CartesianFieldFrame:
    grid: CartesianGrid
    time: float
    q: float
    velocity: tuple[float, float, float]
    omega: float
    omega0: float
    k1: float
    psi_re: np.ndarray
    psi_im: np.ndarray
    u_amp: np.ndarray
    u_dot: np.ndarray
    phase: np.ndarray
    phase_t: np.ndarray
    phase_grad: np.ndarray
    phi_pot: np.ndarray
    A_pot: np.ndarray
    A_dot: np.ndarray
    E_field: np.ndarray
    H_field: np.ndarray
    rho: np.ndarray
    j_current: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.velocity[0] ** 2)


# -- discrete operators -------------------------------------------------------

def grad(f: np.ndarray, h: float) -> np.ndarray:
    g3, g2, g1 = np.gradient(f, h)
    return np.stack([g1, g2, g3])


def div(F: np.ndarray, h: float) -> np.ndarray:
    return (np.gradient(F[0], h, axis=2) + np.gradient(F[1], h, axis=1)
            + np.gradient(F[2], h, axis=0))


def curl(F: np.ndarray, h: float) -> np.ndarray:
    def d(comp, ax):
        return np.gradient(F[comp], h, axis={1: 2, 2: 1, 3: 0}[ax])
    return np.stack([d(2, 2) - d(1, 3), d(0, 3) - d(2, 1), d(1, 1) - d(0, 2)])


def laplacian7(f: np.ndarray, h: float) -> np.ndarray:
    """7-point Laplacian; boundary layer left at zero."""
    out = np.zeros_like(f)
    c = f[1:-1, 1:-1, 1:-1]
    out[1:-1, 1:-1, 1:-1] = (
        f[2:, 1:-1, 1:-1] + f[:-2, 1:-1, 1:-1] + f[1:-1, 2:, 1:-1] + f[1:-1, :-2, 1:-1]
        + f[1:-1, 1:-1, 2:] + f[1:-1, 1:-1, :-2] - 6.0 * c) / h**2
    return out


def interior_l2(f: np.ndarray, h: float, layers: int = 2, mask: np.ndarray | None = None) -> float:
    """Discrete L2 norm over nodes at least ``layers`` away from the box faces."""
    sl = (slice(layers, -layers),) * 3
    g = f[(Ellipsis,) + sl] if f.ndim == 4 else f[sl]
    sq = g**2 if f.ndim == 3 else np.sum(g**2, axis=0)
    if mask is not None:
        sq = sq * mask[sl]
    return float(math.sqrt(h**3 * float(np.sum(sq))))


# -- construction -------------------------------------------------------------

def _safe_ratio(a, b):
    out = np.zeros_like(a)
    np.divide(a, b, out=out, where=b > 0)
    return out


def boost(sol: SolitaryWaveSolution, v: float, t: float, grid: CartesianGrid) -> CartesianFieldFrame:
    """Standing wave u(x) e^{-i omega0 t}, phi = omega0 Phi, boosted to velocity v along x1."""
    v = float(v)
    if not abs(v) < 1.0:
        raise ValueError(f"|v| must be < 1, got {v}")
    if not sol.omega2 > 0:
        raise ValueError("solution has nonpositive omega^2")
    q = float(sol.q)
    gamma = 1.0 / math.sqrt(1.0 - v * v)
    omega0 = math.sqrt(sol.omega2)
    omega = gamma * omega0
    k1 = gamma * omega0 * v
    h = grid.spacing

    X1, X2, X3 = grid.mesh()
    xp = gamma * (X1 - v * t)
    rp = np.sqrt(xp**2 + X2**2 + X3**2)
    del X2, X3
    shape = rp.shape
    u = sol.u(rp.ravel()).reshape(shape)
    du = sol.u(rp.ravel(), 1).reshape(shape)
    Phi = sol.phi(rp.ravel()).reshape(shape)
    dPhi = sol.phi(rp.ravel(), 1).reshape(shape)
    # d r'/dt = (x'/r') * (-gamma v)
    drdt = _safe_ratio(xp, rp) * (-gamma * v)
    del xp, rp

    phi_rest = omega0 * Phi
    phi = gamma * phi_rest
    zeros = np.zeros(shape)
    A = np.stack([gamma * v * phi_rest, zeros, zeros])
    A_dot = np.stack([gamma * v * omega0 * dPhi * drdt, zeros, zeros])
    u_dot = du * drdt
    del Phi, dPhi, drdt, du

    phase = k1 * X1 - omega * t
    phase_t = np.full(shape, -omega)
    phase_grad = np.stack([np.full(shape, k1), zeros, zeros])

    E = -(A_dot + grad(phi, h))
    H = curl(A, h)
    rho = -(phase_t + q * phi) * q * u**2
    j = (phase_grad - q * A) * (q * u**2)

    diag = _resolution_diagnostics(sol, grid, gamma, u)
    return CartesianFieldFrame(
        grid=grid, time=float(t), q=q, velocity=(v, 0.0, 0.0), omega=omega, omega0=omega0,
        k1=k1, psi_re=u * np.cos(phase), psi_im=u * np.sin(phase), u_amp=u, u_dot=u_dot,
        phase=phase, phase_t=phase_t, phase_grad=phase_grad, phi_pot=phi, A_pot=A, A_dot=A_dot,
        E_field=E, H_field=H, rho=rho, j_current=j, diagnostics=diag,
    )


def _resolution_diagnostics(sol, grid, gamma, u) -> dict:
    r = sol.u.r
    vals = sol.u.values
    half = float(r[np.argmax(vals <= 0.5 * vals.max())])
    core = half / gamma
    umax = float(np.max(np.abs(u))) or 1.0
    edge = max(float(np.abs(u[[0, -1]]).max()), float(np.abs(u[:, [0, -1]]).max()),
               float(np.abs(u[:, :, [0, -1]]).max())) / umax
    diag = {"core_radius": core, "spacing": grid.spacing, "edge_amplitude": edge,
            "warnings": []}
    if grid.spacing > 0.5 * core:
        diag["warnings"].append(
            f"grid spacing {grid.spacing:.3g} coarse against core radius {core:.3g}")
    if edge > 1e-2:
        diag["warnings"].append(f"profile not decayed at box faces (relative {edge:.2g})")
    for w in diag["warnings"]:
        warnings.warn(w, RuntimeWarning, stacklevel=3)
    return diag


# -- residuals ----------------------------------------------------------------

def _check_pair(a: CartesianFieldFrame, b: CartesianFieldFrame) -> float:
    if a.grid != b.grid:
        raise GridMismatchError("frames live on different grids")
    dt = b.time - a.time
    if not dt > 0:
        raise ValueError("second frame must be later than the first")
    return dt


def maxwell_fields(frame: CartesianFieldFrame, frame_dt: CartesianFieldFrame) -> dict:
    """Midpoint residual arrays and their term scales for the five field equations."""
    dt = _check_pair(frame, frame_dt)
    h = frame.grid.spacing
    a, b = frame, frame_dt
    E_t = (b.E_field - a.E_field) / dt
    H_t = (b.H_field - a.H_field) / dt
    rho_t = (b.rho - a.rho) / dt
    divE = 0.5 * (div(a.E_field, h) + div(b.E_field, h))
    rho = 0.5 * (a.rho + b.rho)
    curlH = 0.5 * (curl(a.H_field, h) + curl(b.H_field, h))
    j = 0.5 * (a.j_current + b.j_current)
    curlE = 0.5 * (curl(a.E_field, h) + curl(b.E_field, h))
    divH = 0.5 * (div(a.H_field, h) + div(b.H_field, h))
    divj = 0.5 * (div(a.j_current, h) + div(b.j_current, h))
    n = lambda f: interior_l2(f, h)  # noqa: E731
    # scales use undifferentiated fields / h so that identities holding to
    # rounding (curl grad, div curl) are recognised as exact
    nE = 0.5 * (n(a.E_field) + n(b.E_field)) / h
    nH = 0.5 * (n(a.H_field) + n(b.H_field)) / h
    nj = n(j)
    return {
        "gauss": (divE - rho, nE + n(rho)),
        "ampere": (curlH - E_t - j, nH + n(E_t) + nj),
        "faraday": (curlE + H_t, nE + n(H_t)),
        "monopole": (divH, nH),
        "continuity": (rho_t + divj, n(rho_t) + nj / h),
    }


def maxwell_residuals(frame: CartesianFieldFrame, frame_dt: CartesianFieldFrame) -> Report:
    """Interior L2 norms of the five field-equation residuals at the frames' midpoint."""
    h = frame.grid.spacing
    rep = Report()
    for name, (res, scale) in maxwell_fields(frame, frame_dt).items():
        val = interior_l2(res, h)
        exact = val <= EXACT_REL * max(scale, 1e-300) or scale == 0.0
        rep.add(Check(name, True, val, None,
                      "exact (rounding level)" if exact else f"term scale {scale:.3g}"))
    return rep


def refinement_order(coarse: float, fine: float, h_coarse: float, h_fine: float) -> float:
    if fine == 0.0:
        return math.inf
    return math.log(coarse / fine) / math.log(h_coarse / h_fine)


def maxwell_refinement(sol: SolitaryWaveSolution, v: float, t: float, grid: CartesianGrid,
                       min_order: float = 1.8) -> Report:
    """Residuals on ``grid`` and its refinement with observed convergence orders."""
    results = []
    for g in (grid, grid.refined()):
        dt = g.spacing / 4.0
        f0 = boost(sol, v, t, g)
        f1 = boost(sol, v, t + dt, g)
        results.append((g.spacing, maxwell_residuals(f0, f1)))
        del f0, f1
    (hc, rc), (hf, rf) = results
    rep = Report()
    for name in rc:
        c, f = rc[name], rf[name]
        both_exact = c.detail.startswith("exact") and f.detail.startswith("exact")
        order = math.inf if both_exact else refinement_order(c.value, f.value, hc, hf)
        rep.add(Check(name, both_exact or order >= min_order, order, min_order,
                      f"coarse {c.value:.3e} fine {f.value:.3e}" + (" (exact)" if both_exact else "")))
    return rep


def matter_fields(frame: CartesianFieldFrame, frames_dt, model: NonlinearityModel, q: float,
                  u_floor_rel: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """(residual, mask) of u_tt - Lap u + W'(u) + (j^2 - rho^2)/(q^2 u^3)."""
    if not q > 0:
        raise ValueError("matter residual needs q > 0")
    prev, nxt = frames_dt
    dt1 = _check_pair(prev, frame)
    dt2 = _check_pair(frame, nxt)
    if abs(dt1 - dt2) > 1e-12 * max(dt1, dt2):
        raise ValueError("matter residual needs equally spaced frames")
    h = frame.grid.spacing
    u = frame.u_amp
    u_tt = (nxt.u_amp - 2.0 * u + prev.u_amp) / dt1**2
    floor = u_floor_rel * float(np.max(np.abs(u)))
    mask = np.abs(u) >= floor
    j2 = np.sum(frame.j_current**2, axis=0)
    coupling = np.zeros_like(u)
    np.divide(j2 - frame.rho**2, q**2 * u**3, out=coupling, where=mask)
    res = u_tt - laplacian7(u, h) + model.dW(u) + coupling
    return res * mask, mask


def matter_residual(frame: CartesianFieldFrame, frames_dt, model: NonlinearityModel, q: float,
                    u_floor_rel: float = 1e-6) -> Report:
    res, mask = matter_fields(frame, frames_dt, model, q, u_floor_rel)
    h = frame.grid.spacing
    rep = Report()
    rep.add(Check("matter", True, interior_l2(res, h, mask=mask), None, "masked interior L2"))
    frac = float(np.mean(~mask))
    rep.add(Check("masked_fraction", True, frac, None,
                  f"nodes below u_floor = {u_floor_rel:g} max u"))
    return rep


def radial_reference_residual(sol: SolitaryWaveSolution, model: NonlinearityModel,
                              spacing: float, r_out: float, u_floor_rel: float = 1e-6) -> float:
    """Static residual with the radial three-point stencil at a given spacing.

    Samples the stored profile at r_k = k * spacing and evaluates
    -u'' - 2u'/r + W'(u) - omega^2 (1 - q Phi)^2 u in the volume L2 norm, the
    radial counterpart of the Cartesian matter residual at the same spacing.
    """
    r = spacing * np.arange(1, int(r_out / spacing) + 1)
    ext = np.concatenate([r[:1] - spacing, r, r[-1:] + spacing])
    u = sol.u(ext)
    phi = sol.phi(r)
    uc = u[1:-1]
    lap = (u[2:] - 2 * uc + u[:-2]) / spacing**2 + (u[2:] - u[:-2]) / (spacing * r)
    res = -lap + model.dW(uc) - sol.omega2 * (1 - sol.q * phi) ** 2 * uc
    res = np.where(np.abs(uc) >= u_floor_rel * np.abs(uc).max(), res, 0.0)
    return float(math.sqrt(4 * np.pi * np.trapezoid(res**2 * r**2, r)))


def matter_refinement(sol: SolitaryWaveSolution, model: NonlinearityModel, v: float, t: float,
                      grid: CartesianGrid, min_ratio: float = 3.5) -> Report:
    vals = []
    for g in (grid, grid.refined()):
        dt = g.spacing / 4.0
        frames = [boost(sol, v, t + k * dt, g) for k in (-1, 0, 1)]
        rep = matter_residual(frames[1], (frames[0], frames[2]), model, sol.q)
        vals.append((g.spacing, rep["matter"].value))
        del frames
    (hc, c), (hf, f) = vals
    ratio = c / f if f > 0 else math.inf
    rep = Report()
    rep.add(Check("matter_ratio", ratio >= min_ratio, ratio, min_ratio,
                  f"coarse {c:.3e} fine {f:.3e}, order {refinement_order(c, f, hc, hf):.3f}"))
    return rep


# -- gauge transformations and energy -----------------------------------------

def gauge_transform(frame: CartesianFieldFrame, chi, dt: float | None = None) -> CartesianFieldFrame:
    """psi -> psi e^{i q chi}, phi -> phi - chi_t, A -> A + grad chi.

    ``chi(t, x1, x2, x3)`` is sampled on the frame grid; grad chi and chi_t are
    centred differences.  u and rho are gauge-invariant observables and are
    carried over unchanged; E, H and j are recomputed from the new potentials.
    """
    g = frame.grid
    h = g.spacing
    dt = h / 4.0 if dt is None else dt
    X1, X2, X3 = g.mesh()
    t = frame.time
    shape = frame.u_amp.shape
    c0 = np.broadcast_to(np.asarray(chi(t, X1, X2, X3), dtype=float), shape)
    c_t = (np.broadcast_to(np.asarray(chi(t + dt, X1, X2, X3), dtype=float), shape)
           - np.broadcast_to(np.asarray(chi(t - dt, X1, X2, X3), dtype=float), shape)) / (2 * dt)
    del X1, X2, X3
    q = frame.q
    gc = grad(c0, h)
    gc_t = grad(c_t, h)

    phase = frame.phase + q * c0
    phase_t = frame.phase_t + q * c_t
    phase_grad = frame.phase_grad + q * gc
    phi = frame.phi_pot - c_t
    A = frame.A_pot + gc
    A_dot = frame.A_dot + gc_t
    rot = np.exp(1j * q * c0)
    psi = (frame.psi_re + 1j * frame.psi_im) * rot

    E = -(A_dot + grad(phi, h))
    H = curl(A, h)
    j = (phase_grad - q * A) * (q * frame.u_amp**2)
    return replace(frame, psi_re=psi.real, psi_im=psi.imag, phase=phase, phase_t=phase_t,
                   phase_grad=phase_grad, phi_pot=phi, A_pot=A, A_dot=A_dot, E_field=E,
                   H_field=H, j_current=j, diagnostics=dict(frame.diagnostics))


def charge_density(frame: CartesianFieldFrame) -> np.ndarray:
    """rho = -(S_t + q phi) q u^2 recomputed from the frame's phase and potential."""
    return -(frame.phase_t + frame.q * frame.phi_pot) * frame.q * frame.u_amp**2


def energy_density(frame: CartesianFieldFrame, model: NonlinearityModel) -> np.ndarray:
    """1/2 u_t^2 + 1/2|grad u|^2 + W(u) + (rho^2 + j^2)/(2 q^2 u^2) + (E^2 + H^2)/2.

    The matter-coupling term is evaluated as 1/2 u^2 ((S_t + q phi)^2 + |grad S - q A|^2),
    which equals the quotient form and stays finite where u vanishes.
    """
    h = frame.grid.spacing
    u = frame.u_amp
    gu = grad(u, h)
    q = frame.q
    cov_t = frame.phase_t + q * frame.phi_pot
    cov_x = frame.phase_grad - q * frame.A_pot
    return (0.5 * frame.u_dot**2 + 0.5 * np.sum(gu**2, axis=0) + model.W(u)
            + 0.5 * u**2 * (cov_t**2 + np.sum(cov_x**2, axis=0))
            + 0.5 * (np.sum(frame.E_field**2, axis=0) + np.sum(frame.H_field**2, axis=0)))


def total_energy(frame: CartesianFieldFrame, model: NonlinearityModel) -> float:
    return float(frame.grid.spacing**3 * np.sum(energy_density(frame, model)))


# -- persistence --------------------------------------------------------------

_ARRAYS = ("psi_re", "psi_im", "u_amp", "u_dot", "phase", "phase_t", "phase_grad", "phi_pot",
           "A_pot", "A_dot", "E_field", "H_field", "rho", "j_current")


def save_frame(frame: CartesianFieldFrame, path) -> Path:
    """Write a frame as .npz; the JSON 'header' entry documents layout and scalars."""
    path = Path(path)
    header = {
        "format": FRAME_FORMAT, "axis_order": AXIS_ORDER, "fields": list(_ARRAYS),
        "n_per_axis": frame.grid.n_per_axis, "half_width": frame.grid.half_width,
        "spacing": frame.grid.spacing, "time": frame.time, "q": frame.q,
        "velocity": list(frame.velocity), "omega": frame.omega, "omega0": frame.omega0,
        "k1": frame.k1, "diagnostics": frame.diagnostics,
    }
    arrays = {name: getattr(frame, name) for name in _ARRAYS}
    with open(path, "wb") as fh:
        np.savez(fh, header=np.array(json.dumps(header, sort_keys=True)), **arrays)
    return path


def load_frame(path) -> CartesianFieldFrame:
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        if header.get("format") != FRAME_FORMAT:
            raise ValueError(f"{path}: not a frame file")
        arrays = {name: np.array(data[name]) for name in _ARRAYS}
    grid = CartesianGrid(int(header["n_per_axis"]), float(header["half_width"]))
    return CartesianFieldFrame(
        grid=grid, time=header["time"], q=header["q"], velocity=tuple(header["velocity"]),
        omega=header["omega"], omega0=header["omega0"], k1=header["k1"],
        diagnostics=header.get("diagnostics", {}), **arrays)
