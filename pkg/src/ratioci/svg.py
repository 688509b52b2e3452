"""Minimal SVG line charts for coverage curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


@dataclass
class Series:
    label: str
    xs: list[float]
    ys: list[float]


@dataclass
class LineChart:
    title: str
    x_label: str
    y_label: str = "coverage"
    log_x: bool = False
    series: list[Series] = field(default_factory=list)
    h_rules: list[tuple[float, str]] = field(default_factory=list)
    v_rules: list[tuple[float, str]] = field(default_factory=list)
    width: int = 720
    height: int = 440

    def render(self) -> str:
        left, right, top, bottom = 70, 190, 40, 55
        pw, ph = self.width - left - right, self.height - top - bottom
        tx = (lambda v: math.log10(v)) if self.log_x else (lambda v: v)

        xs = [tx(x) for s in self.series for x in s.xs]
        xs += [tx(v) for v, _ in self.v_rules if (v > 0 or not self.log_x)]
        x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        ys = [y for s in self.series for y in s.ys] + [v for v, _ in self.h_rules]
        y0, y1 = min([0.0] + ys), max([1.0] + ys)

        def px(v: float) -> float:
            return left + (tx(v) - x0) / (x1 - x0) * pw

        def py(v: float) -> float:
            return top + (1.0 - (v - y0) / (y1 - y0)) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif" font-size="12">',
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
            f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(self.title)}</text>',
            f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
        ]
        for k in range(6):
            yv = y0 + (y1 - y0) * k / 5
            out.append(f'<text x="{left - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.2f}</text>')
        for xv in _x_ticks(x0, x1, self.log_x):
            label = f"{10 ** xv:g}" if self.log_x else f"{xv:g}"
            xp = left + (xv - x0) / (x1 - x0) * pw
            out.append(f'<line x1="{xp:.1f}" y1="{top + ph}" x2="{xp:.1f}" y2="{top + ph + 4}" stroke="#444"/>')
            out.append(f'<text x="{xp:.1f}" y="{top + ph + 17}" text-anchor="middle">{label}</text>')
        out.append(
            f'<text x="{left + pw / 2:.1f}" y="{self.height - 12}" text-anchor="middle">{escape(self.x_label)}</text>'
        )
        out.append(
            f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 18 {top + ph / 2:.1f})">{escape(self.y_label)}</text>'
        )
        for value, label in self.h_rules:
            yp = py(value)
            out.append(f'<line class="nominal" x1="{left}" y1="{yp:.1f}" x2="{left + pw}" y2="{yp:.1f}" stroke="#000"/>')
            out.append(f'<text x="{left + 4}" y="{yp - 4:.1f}">{escape(label)}</text>')
        for value, label in self.v_rules:
            if self.log_x and value <= 0:
                continue
            xp = px(value)
            out.append(
                f'<line class="threshold" x1="{xp:.1f}" y1="{top}" x2="{xp:.1f}" y2="{top + ph}" '
                f'stroke="#000" stroke-dasharray="6,4"/>'
            )
            out.append(f'<text class="threshold-label" x="{xp + 4:.1f}" y="{top + 14}">{escape(label)}</text>')
        for i, s in enumerate(self.series):
            color = _PALETTE[i % len(_PALETTE)]
            pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(s.xs, s.ys))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
            for x, y in zip(s.xs, s.ys):
                out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="2.5" fill="{color}"/>')
            ly = top + 10 + 18 * i
            out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{left + pw + 36}" y="{ly + 4}">{escape(s.label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _x_ticks(x0: float, x1: float, log_x: bool) -> list[float]:
    if log_x:
        return [float(k) for k in range(math.ceil(x0 - 1e-9), math.floor(x1 + 1e-9) + 1)]
    return [x0 + (x1 - x0) * k / 5 for k in range(6)]
