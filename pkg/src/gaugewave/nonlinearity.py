"""Nonlinearity families W(s) and sampled checks of the hypotheses W1-W5.

The default family is the saturable potential

    W(s) = (m0^2 s0^2 / 2) * t / (1 + t),   t = (s / s0)^2,

which is even, bounded by m0^2 s0^2 / 2, has W''(0) = m0^2 and satisfies
1/2 W'(s) s = W(s) / (1 + t).  Quadratic and power-law families exist as
negative fixtures; tabulated W is read from a two-column CSV.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.interpolate import CubicSpline

Family = Literal["saturable", "quadratic", "power", "user_tabulated"]


class AssumptionError(ValueError):
    """Raised when a model violates hypotheses needed by an operation."""

    def __init__(self, message: str, report: "AssumptionReport | None" = None):
        super().__init__(message)
        self.report = report


class TableRangeError(ValueError):
    """Tabulated W queried outside its table."""


@dataclass(frozen=True, eq=False)
class NonlinearityModel:
    family: Family = "saturable"
    m0: float = 1.0
    s0: float = 1.0
    p_growth: float = 0.0
    c1: float = 0.0
    c2: float = 1.0
    power: float = 4.0
    table_s: np.ndarray | None = field(default=None, repr=False)
    table_w: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in ("saturable", "quadratic", "power", "user_tabulated"):
            raise ValueError(f"unknown nonlinearity family {self.family!r}")
        if self.family != "user_tabulated":
            if not self.m0 > 0:
                raise ValueError("m0 must be positive")
            if not self.s0 > 0:
                raise ValueError("s0 must be positive")
        if not 0.0 <= self.p_growth < 4.0:
            raise ValueError("p_growth must lie in [0, 4)")
        if self.family == "user_tabulated":
            s = np.asarray(self.table_s, dtype=float)
            w = np.asarray(self.table_w, dtype=float)
            if s.ndim != 1 or s.shape != w.shape or s.size < 4:
                raise ValueError("table needs at least 4 (s, W) rows")
            if np.any(np.diff(s) <= 0):
                raise ValueError("table s values must be strictly increasing")
            if not (np.all(np.isfinite(s)) and np.all(np.isfinite(w))):
                raise ValueError("table contains non-finite entries")
            object.__setattr__(self, "table_s", s)
            object.__setattr__(self, "table_w", w)

    # -- constructors -----------------------------------------------------

    @classmethod
    def saturable(cls, m0: float = 1.0, s0: float = 1.0) -> "NonlinearityModel":
        return cls("saturable", m0=m0, s0=s0, p_growth=0.0, c1=0.0, c2=m0**2)

    @classmethod
    def quadratic(cls, m0: float = 1.0) -> "NonlinearityModel":
        return cls("quadratic", m0=m0, p_growth=0.0, c1=0.0, c2=m0**2)

    @classmethod
    def power_law(cls, m0: float = 1.0, power: float = 4.0) -> "NonlinearityModel":
        """W = m0^2 s^2 / 2 - |s|^p / p (the sign-changing prior-work form)."""
        return cls("power", m0=m0, power=power, p_growth=min(max(power - 2.0, 0.0), 3.999),
                   c1=power - 1.0, c2=m0**2)

    @classmethod
    def tabulated(cls, s, w) -> "NonlinearityModel":
        model = cls("user_tabulated", table_s=s, table_w=w)
        d2 = float(model.d2W(0.0))
        object.__setattr__(model, "m0", float(np.sqrt(d2)) if d2 > 0 else 0.0)
        object.__setattr__(model, "c2", abs(d2))
        return model

    @classmethod
    def from_csv(cls, path) -> "NonlinearityModel":
        s, w = read_table(path)
        return cls.tabulated(s, w)

    # -- evaluation -------------------------------------------------------

    @property
    def _table_spline(self) -> tuple[CubicSpline, bool]:
        cached = self.__dict__.get("_spline_cache")
        if cached is None:
            s, w = self.table_s, self.table_w
            even = s[0] >= 0.0
            if even:
                # mirror so the spline is exactly even
                pos = s > 0
                x = np.concatenate([-s[pos][::-1], s[s == 0], s[pos]])
                y = np.concatenate([w[pos][::-1], w[s == 0], w[pos]])
            else:
                x, y = s, w
            cached = (CubicSpline(x, y), even)
            self.__dict__["_spline_cache"] = cached
        return cached

    def _table_eval(self, s, nu: int):
        s = np.asarray(s, dtype=float)
        spline, even = self._table_spline
        lo, hi = spline.x[0], spline.x[-1]
        if np.any(s < lo) or np.any(s > hi):
            raise TableRangeError(f"tabulated W queried outside [{lo}, {hi}]")
        if even:
            # evaluate at |s| so evenness holds bitwise
            val = spline(np.abs(s), nu)
            return np.sign(s) * val if nu % 2 else val
        return spline(s, nu)

    def W(self, s):
        s = np.asarray(s, dtype=float)
        if self.family == "saturable":
            A = 0.5 * self.m0**2 * self.s0**2
            t = (s / self.s0) ** 2
            return A * t / (1.0 + t)
        if self.family == "quadratic":
            return 0.5 * self.m0**2 * s**2
        if self.family == "power":
            return 0.5 * self.m0**2 * s**2 - np.abs(s) ** self.power / self.power
        return self._table_eval(s, 0)

    def dW(self, s):
        s = np.asarray(s, dtype=float)
        if self.family == "saturable":
            t = (s / self.s0) ** 2
            return self.m0**2 * s / (1.0 + t) ** 2
        if self.family == "quadratic":
            return self.m0**2 * s
        if self.family == "power":
            return self.m0**2 * s - np.sign(s) * np.abs(s) ** (self.power - 1.0)
        return self._table_eval(s, 1)

    def d2W(self, s):
        s = np.asarray(s, dtype=float)
        if self.family == "saturable":
            t = (s / self.s0) ** 2
            return self.m0**2 * (1.0 - 3.0 * t) / (1.0 + t) ** 3
        if self.family == "quadratic":
            return self.m0**2 * np.ones_like(s)
        if self.family == "power":
            return self.m0**2 - (self.power - 1.0) * np.abs(s) ** (self.power - 2.0)
        return self._table_eval(s, 2)

    def params(self) -> dict:
        d = {"family": self.family, "m0": float(self.m0), "s0": float(self.s0),
             "p_growth": float(self.p_growth), "c1": float(self.c1), "c2": float(self.c2)}
        if self.family == "power":
            d["power"] = float(self.power)
        if self.family == "user_tabulated":
            d["table_s"] = [float(x) for x in self.table_s]
            d["table_w"] = [float(x) for x in self.table_w]
        return d

    @classmethod
    def from_params(cls, d: dict) -> "NonlinearityModel":
        fam = d.get("family", "saturable")
        if fam == "saturable":
            return cls.saturable(d.get("m0", 1.0), d.get("s0", 1.0))
        if fam == "quadratic":
            return cls.quadratic(d.get("m0", 1.0))
        if fam == "power":
            return cls.power_law(d.get("m0", 1.0), d.get("power", 4.0))
        if fam == "user_tabulated":
            return cls.tabulated(d["table_s"], d["table_w"])
        raise ValueError(f"unknown nonlinearity family {fam!r}")


def eval_W(model: NonlinearityModel, s):
    """Return (W(s), W'(s), W''(s))."""
    return model.W(s), model.dW(s), model.d2W(s)


def read_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column CSV (s, W(s)); a non-numeric first row is taken as header."""
    rows = []
    with open(Path(path), newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ValueError(f"line {lineno}: expected 2 columns, got {len(row)}")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                if lineno == 1 and not rows:
                    continue
                raise ValueError(f"line {lineno}: non-numeric entry {row!r}") from None
    if len(rows) < 4:
        raise ValueError("table needs at least 4 numeric rows")
    arr = np.array(rows)
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise ValueError("table s column must be strictly increasing")
    return arr[:, 0], arr[:, 1]


@dataclass
class AssumptionReport:
    w1: bool
    w2: bool
    w3: bool
    w4: bool
    w5: bool
    m0_measured: float
    m1_measured: float
    bl_conditions: tuple[bool, bool, bool, bool]
    sample_range: tuple[float, float]
    violations: list[tuple[str, float, tuple]] = field(default_factory=list)
    omega0: float | None = None
    m_tail: float = float("nan")
    c_measured: float = float("nan")
    p_measured: float = float("nan")
    c1_measured: float = float("nan")
    c2_measured: float = float("nan")

    @property
    def all_w(self) -> bool:
        return self.w1 and self.w2 and self.w3 and self.w4 and self.w5

    def as_dict(self) -> dict:
        return {
            "W1": self.w1, "W2": self.w2, "W3": self.w3, "W4": self.w4, "W5": self.w5,
            "m0_measured": self.m0_measured, "m1_measured": self.m1_measured,
            "m_tail": self.m_tail, "c_measured": self.c_measured,
            "p_measured": self.p_measured, "c1_measured": self.c1_measured,
            "c2_measured": self.c2_measured,
            "omega0": self.omega0,
            "bl_conditions": list(self.bl_conditions),
            "sample_range": list(self.sample_range),
            "violations": [[a, s, list(v)] for a, s, v in self.violations[:20]],
        }

    def format(self) -> str:
        lines = [f"sample range       [{self.sample_range[0]:g}, {self.sample_range[1]:g}]"]
        for k in ("w1", "w2", "w3", "w4", "w5"):
            lines.append(f"{k.upper():<18} {'pass' if getattr(self, k) else 'FAIL'}")
        lines.append(f"m0 (measured)      {self.m0_measured:.10g}")
        lines.append(f"m1 (measured)      {self.m1_measured:.10g}")
        if self.omega0 is not None:
            names = ("G(0)=G'(0)=0", "G''(0)>0", "limsup G'/s^5>=0", "exists G(u0)<0")
            for name, ok in zip(names, self.bl_conditions):
                lines.append(f"BL {name:<15} {'pass' if ok else 'FAIL'}  (omega0={self.omega0:g})")
        for a, s, v in self.violations[:10]:
            lines.append(f"violation {a} at s={s:.6g}: {v}")
        return "\n".join(lines)


def sample_points(s_max: float, n_samples: int) -> np.ndarray:
    """Symmetric log + linear mix over [-s_max, s_max], including 0."""
    half = max(n_samples // 4, 2)
    lin = np.linspace(0.0, s_max, half)
    lo = min(1e-6, s_max * 1e-3)
    log = np.geomspace(lo, s_max, half)
    pos = np.unique(np.concatenate([lin[1:], log]))
    return np.concatenate([-pos[::-1], [0.0], pos])


def check_assumptions(model: NonlinearityModel, s_max: float = 1e3, n_samples: int = 4001,
                      omega0: float | None = None) -> AssumptionReport:
    """Sample W on [-s_max, s_max] and flag W1-W5 plus the Berestycki-Lions conditions.

    W3 is judged on the tail quotient max 2W/s^2 over |s| in [s_max/2, s_max]
    (it must stay below m0^2); m1 is reported as inf 2W/s^2 over the samples.
    Violations are collected, never raised.
    """
    if not s_max > 0:
        raise ValueError("s_max must be positive")
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    s = sample_points(s_max, n_samples)
    W, W1, W2 = eval_W(model, s)
    violations: list[tuple[str, float, tuple]] = []
    scale = max(float(np.max(np.abs(W))), 1e-300)
    tol = 1e-12 * scale

    W0, dW0, d2W0 = (float(x) for x in eval_W(model, 0.0))
    neg = np.flatnonzero(W < -tol)
    for i in neg:
        violations.append(("W1", float(s[i]), (float(W[i]),)))
    w1 = neg.size == 0 and abs(W0) <= tol and abs(dW0) <= 1e-12 * max(abs(d2W0), 1.0)
    if abs(W0) > tol or abs(dW0) > 1e-12 * max(abs(d2W0), 1.0):
        violations.append(("W1", 0.0, (W0, dW0)))

    w2 = d2W0 > 0
    m0 = float(np.sqrt(d2W0)) if w2 else 0.0
    if not w2:
        violations.append(("W2", 0.0, (d2W0,)))

    nz = s != 0
    quot = 2.0 * W[nz] / s[nz] ** 2
    m1_sq = float(np.min(quot))
    m1 = float(np.sqrt(max(m1_sq, 0.0)))
    tail = np.abs(s[nz]) >= 0.5 * s_max
    m_tail_sq = float(np.max(quot[tail]))
    w3 = w2 and m_tail_sq < m0**2 * (1.0 - 1e-9)
    m_tail = float(np.sqrt(max(m_tail_sq, 0.0)))
    c_meas = float(np.max(W - 0.5 * m_tail_sq * s**2))
    if not w3:
        violations.append(("W3", float(s_max), (m_tail_sq, m0**2)))

    half = 0.5 * W1 * s
    bad4 = np.flatnonzero((half < -tol) | (half > W + tol))
    for i in bad4[:50]:
        violations.append(("W4", float(s[i]), (float(half[i]), float(W[i]))))
    w4 = bad4.size == 0

    abs2 = np.abs(W2)
    inner_mask = np.abs(s) <= 1.0
    c2m = float(np.max(abs2[inner_mask]))
    a, b = 0.5 * s_max, s_max
    ga = abs(float(model.d2W(a)))
    gb = abs(float(model.d2W(b)))
    if gb <= c2m or ga == 0.0:
        p_meas = 0.0
    else:
        p_meas = max(float(np.log(gb / ga) / np.log(b / a)), 0.0)
    outer = ~inner_mask
    c1m = float(np.max(abs2[outer] / np.abs(s[outer]) ** p_meas)) if np.any(outer) else 0.0
    w5 = p_meas < 4.0 and np.all(np.isfinite(W2))
    if not w5:
        violations.append(("W5", float(s_max), (p_meas,)))

    if omega0 is None:
        omega0 = 0.5 * (m1 + m0) if w3 else 0.5 * m0
    G = W - 0.5 * omega0**2 * s**2
    bl1 = abs(W0) <= tol and abs(dW0) <= 1e-12 * max(abs(d2W0), 1.0)
    bl2 = d2W0 - omega0**2 > 0
    dG_big = float(model.dW(s_max)) - omega0**2 * s_max
    bl3 = dG_big / s_max**5 >= -1e-6
    bl4 = bool(np.any(G[s > 0] < 0))

    return AssumptionReport(
        w1=bool(w1), w2=bool(w2), w3=bool(w3), w4=bool(w4), w5=bool(w5),
        m0_measured=m0, m1_measured=m1,
        bl_conditions=(bool(bl1), bool(bl2), bool(bl3), bool(bl4)),
        sample_range=(-float(s_max), float(s_max)), violations=violations,
        omega0=float(omega0), m_tail=m_tail, c_measured=c_meas,
        p_measured=p_meas, c1_measured=c1m, c2_measured=c2m,
    )


def frequency_window(model: NonlinearityModel, s_max: float = 1e3) -> tuple[float, float]:
    """Admissible standing-wave frequencies (m1, m0) for the uncoupled problem."""
    rep = check_assumptions(model, s_max=s_max)
    if not (rep.w1 and rep.w2):
        raise AssumptionError("W1/W2 fail; no frequency window", rep)
    if not rep.w3 or rep.m1_measured >= rep.m0_measured:
        raise AssumptionError(
            f"degenerate frequency window: m1={rep.m1_measured:g} >= m0={rep.m0_measured:g}", rep
        )
    return rep.m1_measured, rep.m0_measured
