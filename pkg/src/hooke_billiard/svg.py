"""Minimal SVG writer for trajectories and bifurcation diagrams."""

from __future__ import annotations

import math

import numpy as np

from .conic_geometry import BilliardTable, ConicClass, classify_conic, foci
from .diagram import DiagramData
from .dynamics import Trajectory

SIZE = 600
PAD = 30


class _Canvas:
    def __init__(self, xlim, ylim, size=SIZE):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        span = max(self.x1 - self.x0, self.y1 - self.y0)
        self.scale = (size - 2 * PAD) / span
        self.width = round((self.x1 - self.x0) * self.scale + 2 * PAD)
        self.height = round((self.y1 - self.y0) * self.scale + 2 * PAD)
        self.items: list[str] = []

    def px(self, x, y):
        return PAD + (x - self.x0) * self.scale, PAD + (self.y1 - y) * self.scale

    def polyline(self, pts, stroke="black", width=1.0, dash=None):
        coords = " ".join("{:.2f},{:.2f}".format(*self.px(x, y)) for x, y in pts)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(
            f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="{width}"{extra}/>'
        )

    def polygon(self, pts, fill):
        coords = " ".join("{:.2f},{:.2f}".format(*self.px(x, y)) for x, y in pts)
        self.items.append(f'<polygon points="{coords}" fill="{fill}" stroke="none"/>')

    def dot(self, x, y, r=3.0, fill="black"):
        cx, cy = self.px(x, y)
        self.items.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r}" fill="{fill}"/>')

    def text(self, x, y, label, size=12):
        cx, cy = self.px(x, y)
        self.items.append(f'<text x="{cx:.2f}" y="{cy:.2f}" font-size="{size}">{label}</text>')

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">'
        )
        return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *self.items, "</svg>"]) + "\n"


def _conic_curves(table: BilliardTable, lam: float, extent: float):
    """Polylines approximating ``C_lam`` inside the square ``[-extent, extent]^2``."""
    cls = classify_conic(table, lam)
    if cls is ConicClass.DEGENERATE_FOCAL:
        f1, f2 = foci(table)
        return [np.array([f1, f2])]
    if cls is ConicClass.DEGENERATE_MINOR_AXIS:
        return [np.array([[0.0, -extent], [0.0, extent]])]
    t = np.linspace(0, 2 * np.pi, 241)
    if cls is ConicClass.HYPERBOLA:
        ax, by = math.sqrt(table.a - lam), math.sqrt(lam - table.b)
        tmax = math.asinh(extent / by)
        s = np.linspace(-tmax, tmax, 121)
        branch = np.column_stack([ax * np.cosh(s), by * np.sinh(s)])
        return [branch, branch * [-1, 1]]
    ax, by = math.sqrt(table.a - lam), math.sqrt(table.b - lam)
    return [np.column_stack([ax * np.cos(t), by * np.sin(t)])]


def trajectory_svg(traj: Trajectory, caustic_params=(), arc_samples: int = 32) -> str:
    table = traj.table
    extent = 1.15 * math.sqrt(table.a)
    for lam in caustic_params:
        if lam < 0:
            extent = max(extent, 1.05 * math.sqrt(table.a - lam))
    cv = _Canvas((-extent, extent), (-extent, extent))
    for lam in caustic_params:
        for curve in _conic_curves(table, lam, extent):
            cv.polyline(curve, stroke="#1f77b4", width=1.2, dash="6,4")
    for curve in _conic_curves(table, 0.0, extent):
        cv.polyline(curve, stroke="black", width=2.0)
    for arc in traj.arcs:
        pts = arc.sample(table, arc_samples).xi
        cv.polyline(pts, stroke="#d62728", width=0.8)
    for f in foci(table):
        cv.dot(*f, r=2.5)
    return cv.render()


def diagram_svg(data: DiagramData) -> str:
    t = data.table
    e_b = t.band_energies()[0]
    xlim = (e_b - 0.1 * data.e_max, data.e_max)
    ylim = (-0.1 * t.a, 1.15 * t.a)
    cv = _Canvas(xlim, ylim)
    cv.polygon(data.boundary, fill="#cccccc")
    cv.polyline(data.boundary[:2], width=2.0)
    cv.polyline(data.boundary[1:3], stroke="gray", width=2.0)
    cv.polyline(data.boundary[2:], width=2.0)
    line_b = data.critical[1]
    cv.polyline([(line_b.e_start, t.b), (data.e_max, t.b)], width=2.0, dash="6,4")
    for E, lam in data.points:
        cv.dot(E, lam, r=0.8, fill="#555555")
    for E, lam in data.corners:
        cv.dot(E, lam, r=4.0)
    cv.polyline([(xlim[0], 0), (xlim[1], 0)], stroke="gray", width=0.5)
    cv.text(xlim[1] - 0.05 * data.e_max, ylim[0] + 0.02 * t.a, "E")
    cv.text(xlim[0] + 0.01 * data.e_max, ylim[1] - 0.05 * t.a, "lambda2")
    return cv.render()
