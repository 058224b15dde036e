# src/mht_allee/basins.py
"""Basin-of-attraction grids, basin areas and the non-fertile population sweep.

Every grid cell centre is integrated until it enters an attractor ball or
the horizon expires; cells are labelled by the attractor reached.  The
same pipeline runs in either coordinate frame, so the dimensional model
(both growth-law variants) and the rescaled system can be compared
directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .equilibria import INTERIOR_UPPER, is_attractor, positive_equilibria
from .model import (
    MULTIPLE_ALLEE,
    DimParams,
    NondimParams,
    jacobian_dim,
    nondimensionalize,
)

__all__ = [
    "BasinGrid",
    "BasinReport",
    "LABEL_PREDATOR_ONLY",
    "LABEL_COEXISTENCE",
    "LABEL_UNDECIDED",
    "attractors_of",
    "compute_basin",
    "basin_area",
    "scan_b",
    "points_in_polygon",
    "separatrix_polygon",
    "predict_labels_from_separatrix",
]

LABEL_PREDATOR_ONLY = 0
LABEL_COEXISTENCE = 1
LABEL_UNDECIDED = -1

_LABEL_NAMES = {
    "to-(0,C)": LABEL_PREDATOR_ONLY,
    "predator-only": LABEL_PREDATOR_ONLY,
    "to-P2": LABEL_COEXISTENCE,
    "coexistence": LABEL_COEXISTENCE,
    "undecided": LABEL_UNDECIDED,
}

BALL_RADIUS = 1e-3   # in rescaled units; dimensional runs scale by (K, nK)


@dataclass
class BasinGrid:
    window: tuple[float, float, float, float]
    nx: int
    ny: int
    labels: np.ndarray                       # (ny, nx) int8
    frame: str                               # "nondimensional" | "dimensional"
    attractors: list[tuple[int, tuple[float, float]]]
    params: NondimParams | DimParams
    horizon: float

    @property
    def cell_area(self) -> float:
        x0, x1, y0, y1 = self.window
        return (x1 - x0) * (y1 - y0) / (self.nx * self.ny)

    @property
    def undecided_fraction(self) -> float:
        return float(np.mean(self.labels == LABEL_UNDECIDED))

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        x0, x1, y0, y1 = self.window
        xs = x0 + (np.arange(self.nx) + 0.5) * (x1 - x0) / self.nx
        ys = y0 + (np.arange(self.ny) + 0.5) * (y1 - y0) / self.ny
        return xs, ys


@dataclass
class BasinReport:
    variant: str
    b: float
    area_p2: float
    area_0c: float
    undecided: float
    window: tuple[float, float, float, float]
    nx: int
    ny: int


def _strong_allee_coexistence(p: DimParams) -> tuple[float, float] | None:
    """Interior attractor of the strong-Allee dimensional model, if any.

    Interior equilibria satisfy y = n x + c on the prey balance
    (r/K) x^2 - (r (1 + m/K) - q n) x + (r m + q c) = 0; the larger root
    is the coexistence candidate.
    """
    a = p.r / p.K
    b = -(p.r * (1.0 + p.m / p.K) - p.q * p.n)
    c = p.r * p.m + p.q * p.c
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        return None
    x2 = (-b + math.sqrt(disc)) / (2.0 * a)
    if not 0.0 < x2 < p.K:
        return None
    y2 = p.n * x2 + p.c
    J = jacobian_dim(p, (x2, y2))
    tr = float(J[0, 0] + J[1, 1])
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    if det > 0.0 and tr < 0.0:
        return x2, y2
    return None


def attractors_of(p: NondimParams | DimParams) -> list[tuple[int, tuple[float, float]]]:
    """Attractor list [(label, location)] in the frame of ``p``.

    The predator-only state is always attracting; the coexistence point is
    included only when it exists and is linearly stable.
    """
    if isinstance(p, NondimParams):
        out = [(LABEL_PREDATOR_ONLY, (0.0, p.C))]
        upper = next((e for e in positive_equilibria(p) if e.kind == INTERIOR_UPPER), None)
        if upper is not None and is_attractor(upper.classification):
            out.append((LABEL_COEXISTENCE, (upper.location.u, upper.location.v)))
        return out
    out = [(LABEL_PREDATOR_ONLY, (0.0, p.c))]
    if p.variant == MULTIPLE_ALLEE:
        nd = nondimensionalize(p)
        upper = next((e for e in positive_equilibria(nd) if e.kind == INTERIOR_UPPER), None)
        if upper is not None and is_attractor(upper.classification):
            out.append(
                (LABEL_COEXISTENCE, (p.K * upper.location.u, p.n * p.K * upper.location.v))
            )
    else:
        coex = _strong_allee_coexistence(p)
        if coex is not None:
            out.append((LABEL_COEXISTENCE, coex))
    return out


def _kernel_args(p: NondimParams | DimParams) -> tuple[int, np.ndarray, float, float]:
    """(code, parameter vector, x scale, y scale) for the kernels."""
    if isinstance(p, NondimParams):
        return K.FIELD_NONDIM, np.array([p.M, p.B, p.C, p.S, p.Q, 0.0, 0.0, 0.0]), 1.0, 1.0
    code = K.FIELD_DIM_MULTIPLE if p.variant == MULTIPLE_ALLEE else K.FIELD_DIM_STRONG
    par = np.array([p.r, p.K, p.m, p.q, p.s, p.n, p.b, p.c])
    return code, par, p.K, p.n * p.K


def compute_basin(
    p: NondimParams | DimParams,
    window: tuple[float, float, float, float],
    nx: int,
    ny: int,
    *,
    t_max: float = 1e4,
    tol: float = 1e-8,
    ball_radius: float = BALL_RADIUS,
    max_steps: int = 5_000_000,
) -> BasinGrid:
    """Label a grid of initial conditions by the attractor they reach.

    Cell centres only (no supersampling); cells that reach no attractor
    ball within the horizon stay "undecided".  Deterministic for fixed
    inputs.
    """
    x0, x1, y0, y1 = map(float, window)
    if not (x0 < x1 and y0 < y1 and x0 >= 0.0 and y0 >= 0.0):
        raise ValueError(f"window must be a box in the first quadrant, got {window}")
    if nx < 1 or ny < 1:
        raise ValueError(f"resolution must be positive, got {nx}x{ny}")
    attractors = attractors_of(p)
    code, par, sx, sy = _kernel_args(p)
    targets = np.array([[ax, ay] for _, (ax, ay) in attractors], dtype=float)
    xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
    ys = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
    raw = K.basin_labels(
        code, par, xs, ys, targets, ball_radius, sx, sy, t_max, tol, tol, max_steps
    )
    labels = np.full_like(raw, LABEL_UNDECIDED)
    for i, (label, _) in enumerate(attractors):
        labels[raw == i] = label
    frame = "nondimensional" if isinstance(p, NondimParams) else "dimensional"
    return BasinGrid(
        window=(x0, x1, y0, y1),
        nx=nx,
        ny=ny,
        labels=labels,
        frame=frame,
        attractors=attractors,
        params=p,
        horizon=t_max,
    )


def basin_area(grid: BasinGrid, which: int | str) -> float:
    """Total area of the cells carrying the requested label."""
    label = _LABEL_NAMES[which] if isinstance(which, str) else int(which)
    return float(np.count_nonzero(grid.labels == label)) * grid.cell_area


def scan_b(
    template: DimParams,
    b_values,
    window: tuple[float, float, float, float] | None = None,
    nx: int = 256,
    ny: int = 256,
    *,
    t_max: float = 1e4,
    tol: float = 1e-8,
) -> dict[str, list[BasinReport]]:
    """Basin areas versus the non-fertile population b, per growth law.

    The multiple-Allee model is re-solved for every b; the strong-Allee
    model does not contain b, so its report is computed once.  The default
    measurement window is [0, K] x [0, nK + c], the dimensional image of
    the trapping box.
    """
    if window is None:
        window = (0.0, template.K, 0.0, template.n * template.K + template.c)

    def report(p: DimParams, b: float) -> BasinReport:
        g = compute_basin(p, window, nx, ny, t_max=t_max, tol=tol)
        return BasinReport(
            variant=p.variant,
            b=b,
            area_p2=basin_area(g, LABEL_COEXISTENCE),
            area_0c=basin_area(g, LABEL_PREDATOR_ONLY),
            undecided=basin_area(g, LABEL_UNDECIDED),
            window=g.window,
            nx=nx,
            ny=ny,
        )

    multiple = [
        report(template.replace(b=float(b), variant=MULTIPLE_ALLEE), float(b)) for b in b_values
    ]
    strong = [report(template.replace(variant="strong-allee"), float(template.b))]
    return {MULTIPLE_ALLEE: multiple, "strong-allee": strong}


def points_in_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Even-odd containment test of ``points`` (n, 2) in ``polygon`` (m, 2)."""
    x = points[:, 0][:, None]
    y = points[:, 1][:, None]
    x0 = polygon[:-1, 0][None, :]
    y0 = polygon[:-1, 1][None, :]
    x1 = polygon[1:, 0][None, :]
    y1 = polygon[1:, 1][None, :]
    straddle = (y0 <= y) != (y1 <= y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    hits = straddle & (x_cross > x)
    return np.count_nonzero(hits, axis=1) % 2 == 1


def _boundary_coord(win, pt) -> float:
    """Perimeter coordinate of a boundary-adjacent point, counterclockwise."""
    x0, x1, y0, y1 = win
    w, h = x1 - x0, y1 - y0
    x, y = float(pt[0]), float(pt[1])
    dists = [abs(y - y0), abs(x - x1), abs(y - y1), abs(x - x0)]  # bottom, right, top, left
    side = int(np.argmin(dists))
    if side == 0:
        return x - x0
    if side == 1:
        return w + (y - y0)
    if side == 2:
        return w + h + (x1 - x)
    return 2.0 * w + h + (y1 - y)


def _boundary_path(win, t_from: float, t_to: float) -> list[tuple[float, float]]:
    """Corner points passed walking the window edge counterclockwise."""
    x0, x1, y0, y1 = win
    w, h = x1 - x0, y1 - y0
    per = 2.0 * (w + h)
    corners = [(w, (x1, y0)), (w + h, (x1, y1)), (2.0 * w + h, (x0, y1)), (per, (x0, y0))]
    span = (t_to - t_from) % per
    passed = []
    for tc, c in corners:
        off = (tc - t_from) % per
        if 0.0 < off < span:
            passed.append((off, c))
    passed.sort()
    return [c for _, c in passed]


def separatrix_polygon(p: NondimParams, window=None, *, branches=None) -> np.ndarray:
    """Closed polygon bounded by the stable manifold of the interior saddle.

    The two stable branches are joined through the saddle; if their far
    ends do not meet (one leaves through the window edge), the polygon is
    closed along the window boundary on the side that keeps the upper
    interior equilibrium inside.  The polygon approximates the basin of
    the coexistence state in the bistable regime.
    """
    from .manifolds import saddle_branches

    if window is None:
        window = (0.0, 1.0, 0.0, 1.0 + p.C)
    if branches is None:
        branches = saddle_branches(p, window=window)
    stable = [b for b in branches if b.stability == "stable"]
    down = next(b for b in stable if b.direction == "down-left")
    up = next(b for b in stable if b.direction == "up-right")
    path = np.vstack([down.polyline[::-1], up.polyline[1:]])
    ea, eb = path[0], path[-1]
    if math.hypot(ea[0] - eb[0], ea[1] - eb[1]) < 0.05:
        return np.vstack([path, path[:1]])
    upper = next(e for e in positive_equilibria(p) if e.kind == INTERIOR_UPPER)
    target = np.array([[upper.location.u, upper.location.v]])
    ta, tb = _boundary_coord(window, ea), _boundary_coord(window, eb)
    cand = []
    closure = _boundary_path(window, tb, ta)
    cand.append(np.vstack([path, np.array(closure + [path[0].tolist()])]))
    closure_rev = _boundary_path(window, ta, tb)[::-1]
    cand.append(np.vstack([path, np.array(closure_rev + [path[0].tolist()])]))
    for poly in cand:
        if points_in_polygon(target, poly)[0]:
            return poly
    return cand[0]


def predict_labels_from_separatrix(p: NondimParams, grid: BasinGrid, *, polygon=None) -> np.ndarray:
    """Cell labels predicted purely by which side of the separatrix they lie on."""
    if polygon is None:
        polygon = separatrix_polygon(p, grid.window)
    xs, ys = grid.cell_centers()
    xx, yy = np.meshgrid(xs, ys)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    inside = points_in_polygon(pts, polygon)
    out = np.where(inside, LABEL_COEXISTENCE, LABEL_PREDATOR_ONLY)
    return out.reshape(grid.ny, grid.nx).astype(np.int8)
