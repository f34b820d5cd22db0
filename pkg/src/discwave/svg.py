"""Minimal line-plot writer producing standalone SVG text.

Output depends only on the input numbers (fixed-precision coordinates, no
timestamps), so identical data gives byte-identical files.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    xs: list[float]
    ys: list[float]
    label: str
    color: str
    dashed: bool = False
    markers: bool = False


@dataclass
class LinePlot:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    logx: bool = False
    logy: bool = False
    width: int = 640
    height: int = 420
    series: list[Series] = field(default_factory=list)

    def add(self, xs, ys, label: str, color: str | None = None, dashed: bool = False,
            markers: bool = False) -> None:
        color = color or PALETTE[len(self.series) % len(PALETTE)]
        self.series.append(Series([float(x) for x in xs], [float(y) for y in ys], label, color, dashed, markers))

    def _usable(self, x: float, y: float) -> bool:
        if not (math.isfinite(x) and math.isfinite(y)):
            return False
        return (not self.logx or x > 0) and (not self.logy or y > 0)

    def render(self) -> str:
        ml, mr, mt, mb = 70, 150, 36, 50
        pw, ph = self.width - ml - mr, self.height - mt - mb
        fx = math.log10 if self.logx else (lambda v: v)
        fy = math.log10 if self.logy else (lambda v: v)

        pts = [(fx(x), fy(y)) for s in self.series for x, y in zip(s.xs, s.ys) if self._usable(x, y)]
        if pts:
            x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
            y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
        else:
            x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5

        def sx(v):
            return ml + (v - x0) / (x1 - x0) * pw

        def sy(v):
            return mt + ph - (v - y0) / (y1 - y0) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif" font-size="11">',
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="white"/>',
            f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
        ]
        if self.title:
            out.append(f'<text x="{ml + pw / 2:.2f}" y="20" text-anchor="middle" font-size="13">{escape(self.title)}</text>')
        for k in range(5):
            fxv = x0 + (x1 - x0) * k / 4
            fyv = y0 + (y1 - y0) * k / 4
            out.append(f'<text x="{sx(fxv):.2f}" y="{mt + ph + 16}" text-anchor="middle">{_tick(fxv, self.logx)}</text>')
            out.append(f'<text x="{ml - 6}" y="{sy(fyv) + 4:.2f}" text-anchor="end">{_tick(fyv, self.logy)}</text>')
        if self.xlabel:
            out.append(f'<text x="{ml + pw / 2:.2f}" y="{self.height - 10}" text-anchor="middle">{escape(self.xlabel)}</text>')
        if self.ylabel:
            out.append(f'<text x="16" y="{mt + ph / 2:.2f}" text-anchor="middle" '
                       f'transform="rotate(-90 16 {mt + ph / 2:.2f})">{escape(self.ylabel)}</text>')
        for idx, s in enumerate(self.series):
            coords = [f"{sx(fx(x)):.2f},{sy(fy(y)):.2f}" for x, y in zip(s.xs, s.ys) if self._usable(x, y)]
            dash = ' stroke-dasharray="5,3"' if s.dashed else ""
            if coords:
                out.append(f'<polyline fill="none" stroke="{s.color}" stroke-width="1.5"{dash} '
                           f'points="{" ".join(coords)}"/>')
                if s.markers:
                    for c in coords:
                        cx, cy = c.split(",")
                        out.append(f'<circle cx="{cx}" cy="{cy}" r="3" fill="{s.color}"/>')
            ly = mt + 14 + 16 * idx
            out.append(f'<line x1="{ml + pw + 10}" y1="{ly - 4}" x2="{ml + pw + 30}" y2="{ly - 4}" '
                       f'stroke="{s.color}" stroke-width="1.5"{dash}/>')
            out.append(f'<text x="{ml + pw + 34}" y="{ly}">{escape(s.label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _tick(v: float, log: bool) -> str:
    if log:
        return f"1e{v:.1f}" if abs(v - round(v)) > 1e-9 else f"1e{int(round(v))}"
    return f"{v:.3g}"
