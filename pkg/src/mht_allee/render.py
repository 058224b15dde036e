# src/mht_allee/render.py
"""Dependency-free SVG rendering of portraits, diagrams and basin maps.

Fixed 800x800 viewBox; polylines, circles and run-length cell rectangles
only, so outputs stay diff-friendly and reproducible byte for byte.
"""
from __future__ import annotations

import numpy as np

from .basins import LABEL_COEXISTENCE, LABEL_PREDATOR_ONLY, BasinGrid
from .equilibria import boundary_equilibria, is_attractor, positive_equilibria
from .model import NondimParams, prey_nullcline

__all__ = ["SvgCanvas", "render_portrait", "render_diagram", "render_basin"]

SIZE = 800
MARGIN = 60

COLOR_PREY_NULLCLINE = "#2166ac"      # blue
COLOR_PRED_NULLCLINE = "#b2182b"      # red
COLOR_BASIN_0C = "#fdae61"            # orange
COLOR_BASIN_P2 = "#abd9e9"            # light blue
COLOR_UNDECIDED = "#dddddd"
COLOR_MANIFOLD_STABLE = "#1a1a1a"
COLOR_MANIFOLD_UNSTABLE = "#878787"
COLOR_CYCLE = "#6a3d9a"
CURVE_COLORS = {"saddle-node": "#1a1a1a", "hopf": "#b2182b", "homoclinic": "#2166ac"}


def _fmt(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


class SvgCanvas:
    """Minimal SVG builder on a fixed square viewport with data-space mapping."""

    def __init__(self, window: tuple[float, float, float, float]):
        self.x0, self.x1, self.y0, self.y1 = map(float, window)
        self.parts: list[str] = [
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}">',
            f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>',
        ]

    def map(self, x: float, y: float) -> tuple[float, float]:
        span = SIZE - 2 * MARGIN
        px = MARGIN + (x - self.x0) / (self.x1 - self.x0) * span
        py = SIZE - MARGIN - (y - self.y0) / (self.y1 - self.y0) * span
        return px, py

    def polyline(self, pts, stroke: str, width: float = 1.5, dash: str | None = None):
        if len(pts) < 2:
            return
        coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in (self.map(x, y) for x, y in pts))
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="{width}"{d}/>'
        )

    def circle(self, x: float, y: float, r: float, fill: str, stroke: str = "black"):
        px, py = self.map(x, y)
        self.parts.append(
            f'<circle cx="{px:.2f}" cy="{py:.2f}" r="{r}" fill="{fill}" stroke="{stroke}" stroke-width="1.2"/>'
        )

    def rect(self, x0: float, y0: float, x1: float, y1: float, fill: str):
        px0, py1 = self.map(x0, y0)
        px1, py0 = self.map(x1, y1)
        self.parts.append(
            f'<rect x="{px0:.2f}" y="{py0:.2f}" width="{px1 - px0:.2f}" height="{py1 - py0:.2f}" '
            f'fill="{fill}" stroke="none"/>'
        )

    def text(self, x: float, y: float, s: str, size: int = 14, anchor: str = "middle"):
        px, py = self.map(x, y)
        self.parts.append(
            f'<text x="{px:.2f}" y="{py:.2f}" font-size="{size}" text-anchor="{anchor}" '
            f'font-family="sans-serif">{s}</text>'
        )

    def frame(self, xlabel: str, ylabel: str):
        a = self.map(self.x0, self.y0)
        b = self.map(self.x1, self.y1)
        self.parts.append(
            f'<rect x="{a[0]:.2f}" y="{b[1]:.2f}" width="{b[0] - a[0]:.2f}" '
            f'height="{a[1] - b[1]:.2f}" fill="none" stroke="black" stroke-width="1"/>'
        )
        self.parts.append(
            f'<text x="{(a[0] + b[0]) / 2:.0f}" y="{SIZE - 15}" font-size="16" '
            f'text-anchor="middle" font-family="sans-serif">{xlabel}</text>'
        )
        self.parts.append(
            f'<text x="18" y="{(a[1] + b[1]) / 2:.0f}" font-size="16" text-anchor="middle" '
            f'font-family="sans-serif" transform="rotate(-90 18 {(a[1] + b[1]) / 2:.0f})">{ylabel}</text>'
        )
        for frac in (0.0, 0.5, 1.0):
            xv = self.x0 + frac * (self.x1 - self.x0)
            yv = self.y0 + frac * (self.y1 - self.y0)
            px, _ = self.map(xv, self.y0)
            _, py = self.map(self.x0, yv)
            self.parts.append(
                f'<text x="{px:.0f}" y="{SIZE - MARGIN + 20}" font-size="12" '
                f'text-anchor="middle" font-family="sans-serif">{_fmt(xv)}</text>'
            )
            self.parts.append(
                f'<text x="{MARGIN - 8}" y="{py:.0f}" font-size="12" text-anchor="end" '
                f'font-family="sans-serif">{_fmt(yv)}</text>'
            )

    def to_string(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_string())


def _draw_basin_cells(canvas: SvgCanvas, grid: BasinGrid):
    x0, x1, y0, y1 = grid.window
    dx = (x1 - x0) / grid.nx
    dy = (y1 - y0) / grid.ny
    fills = {LABEL_PREDATOR_ONLY: COLOR_BASIN_0C, LABEL_COEXISTENCE: COLOR_BASIN_P2}
    for j in range(grid.ny):
        row = grid.labels[j]
        i = 0
        while i < grid.nx:
            lab = row[i]
            k = i
            while k < grid.nx and row[k] == lab:
                k += 1
            canvas.rect(
                x0 + i * dx,
                y0 + j * dy,
                x0 + k * dx,
                y0 + (j + 1) * dy,
                fills.get(int(lab), COLOR_UNDECIDED),
            )
            i = k


def _draw_nondim_skeleton(canvas: SvgCanvas, p: NondimParams, window):
    us = np.linspace(max(window[0], 1e-9), window[1], 400)
    prey = [(u, prey_nullcline(p, u)) for u in us]
    prey = [(u, v) for u, v in prey if window[2] <= v <= window[3]]
    canvas.polyline(prey, COLOR_PREY_NULLCLINE, width=1.5)
    pred = [(u, u + p.C) for u in us if window[2] <= u + p.C <= window[3]]
    canvas.polyline(pred, COLOR_PRED_NULLCLINE, width=1.5)
    for e in boundary_equilibria(p) + positive_equilibria(p):
        fill = "black" if is_attractor(e.classification) else "white"
        canvas.circle(e.location.u, e.location.v, 5.0, fill)


def render_portrait(
    path,
    p: NondimParams,
    *,
    window=None,
    branches=(),
    trajectories=(),
    cycle=None,
    basin: BasinGrid | None = None,
):
    """Phase portrait: nullclines, equilibria, manifolds, orbits, basin underlay."""
    if window is None:
        window = (0.0, 1.0, 0.0, 1.0 + p.C)
    canvas = SvgCanvas(window)
    if basin is not None:
        _draw_basin_cells(canvas, basin)
    _draw_nondim_skeleton(canvas, p, window)
    for br in branches:
        color = COLOR_MANIFOLD_STABLE if br.stability == "stable" else COLOR_MANIFOLD_UNSTABLE
        dash = None if br.stability == "stable" else "6,4"
        canvas.polyline(br.polyline, color, width=2.0, dash=dash)
    for traj in trajectories:
        canvas.polyline(traj.points, "#4d9221", width=1.0)
    if cycle is not None:
        canvas.polyline(cycle.points, COLOR_CYCLE, width=2.0, dash="3,3")
    canvas.frame("prey (rescaled)", "predator (rescaled)")
    canvas.save(path)


def render_basin(path, grid: BasinGrid, *, p: NondimParams | None = None, separatrix=None, cycle=None):
    """Basin map with optional nullcline/separatrix/cycle overlays."""
    canvas = SvgCanvas(grid.window)
    _draw_basin_cells(canvas, grid)
    if p is not None and grid.frame == "nondimensional":
        _draw_nondim_skeleton(canvas, p, grid.window)
    if separatrix is not None:
        canvas.polyline(separatrix, COLOR_MANIFOLD_STABLE, width=2.0)
    if cycle is not None:
        canvas.polyline(cycle.points, COLOR_CYCLE, width=2.0, dash="3,3")
    xl = "prey" if grid.frame == "dimensional" else "prey (rescaled)"
    yl = "predator" if grid.frame == "dimensional" else "predator (rescaled)"
    canvas.frame(xl, yl)
    canvas.save(path)


def render_diagram(path, diagram):
    """Two-parameter diagram: labeled curves, codimension-two point, region tags."""
    (a1name, a1lo, a1hi), (_, c_lo, c_hi) = diagram.plane
    canvas = SvgCanvas((a1lo, a1hi, c_lo, c_hi))
    for label, pts in diagram.curves.items():
        if pts:
            canvas.polyline([(a, c) for a, c, _ in pts], CURVE_COLORS.get(label, "black"), width=2.0)
            a, c, _ = pts[len(pts) // 2]
            canvas.text(a, c, label, size=13, anchor="start")
    for label, (a, c) in diagram.points.items():
        canvas.circle(a, c, 6.0, "black")
        canvas.text(a, c + 0.03 * (c_hi - c_lo), "BT", size=14)
    for (a, c), rc in diagram.regions:
        canvas.text(a, c, rc.panel, size=16)
    canvas.frame(a1name, "C")
    canvas.save(path)
