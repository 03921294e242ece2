"""Minimal deterministic SVG line plots (no plotting runtime)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


@dataclass
class LinePlot:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    width: int = 640
    height: int = 420
    series: list = field(default_factory=list)

    def add(self, x, y, label: str = "", markers: bool = False) -> "LinePlot":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape:
            raise ValueError("x and y must have the same shape")
        self.series.append((x, y, label, markers))
        return self

    def render(self) -> str:
        ml, mr, mt, mb = 70, 20, 40, 55
        pw, ph = self.width - ml - mr, self.height - mt - mb
        finite = [s for s in self.series if np.isfinite(s[0]).any()]
        xs = np.concatenate([s[0][np.isfinite(s[0]) & np.isfinite(s[1])] for s in finite]) if finite else np.zeros(1)
        ys = np.concatenate([s[1][np.isfinite(s[0]) & np.isfinite(s[1])] for s in finite]) if finite else np.zeros(1)
        if xs.size == 0:
            xs = ys = np.zeros(1)
        x0, x1 = _pad(xs.min(), xs.max())
        y0, y1 = _pad(ys.min(), ys.max())

        def px(x):
            return ml + (x - x0) / (x1 - x0) * pw

        def py(y):
            return mt + ph - (y - y0) / (y1 - y0) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif" font-size="12">',
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
            f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        ]
        for t in np.linspace(x0, x1, 5):
            out.append(f'<line x1="{px(t):.2f}" y1="{mt + ph}" x2="{px(t):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{px(t):.2f}" y="{mt + ph + 18}" text-anchor="middle">{t:.4g}</text>')
        for t in np.linspace(y0, y1, 5):
            out.append(f'<line x1="{ml - 5}" y1="{py(t):.2f}" x2="{ml}" y2="{py(t):.2f}" stroke="black"/>')
            out.append(f'<text x="{ml - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.4g}</text>')
        out.append(f'<text x="{ml + pw / 2}" y="{self.height - 12}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {mt + ph / 2})">{escape(self.ylabel)}</text>')
        out.append(f'<text x="{ml + pw / 2}" y="24" text-anchor="middle" font-size="14">{escape(self.title)}</text>')
        for i, (x, y, label, markers) in enumerate(self.series):
            color = PALETTE[i % len(PALETTE)]
            ok = np.isfinite(x) & np.isfinite(y)
            pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], y[ok]))
            if pts:
                out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            if markers:
                out.extend(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" fill="{color}"/>'
                           for a, b in zip(x[ok], y[ok]))
            if label:
                ly = mt + 16 + 16 * i
                out.append(f'<line x1="{ml + pw - 120}" y1="{ly - 4}" x2="{ml + pw - 100}" y2="{ly - 4}" '
                           f'stroke="{color}" stroke-width="2"/>')
                out.append(f'<text x="{ml + pw - 95}" y="{ly}">{escape(label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.render(), encoding="utf-8", newline="\n")
        return path


def _pad(lo: float, hi: float) -> tuple[float, float]:
    if hi == lo:
        d = abs(lo) * 0.05 or 1.0
        return lo - d, hi + d
    d = 0.04 * (hi - lo)
    return lo - d, hi + d
