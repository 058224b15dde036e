# src/mht_allee/manifolds.py
"""Invariant manifolds of the interior saddle and the homoclinic connection.

The interior saddle sits on the line v = u + C below the coexistence
equilibrium.  Its stable manifold is the separatrix between the basin of
the predator-only state (0, C) and the basin of coexistence (when the
latter is attracting).  The homoclinic connection is located by shooting:
both the unstable branch (forward) and the stable branch (backward) are
traced to their first crossings of a reference ray through the upper
equilibrium, and the signed mismatch of the crossing points is driven to
zero by bisection in a parameter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .dynamics import (
    ATTRACTOR_BALL_RADIUS,
    Event,
    attractor_ball_event,
    integrate,
    nondim_kernel_args,
    window_exit_event,
)
from .equilibria import (
    INTERIOR_LOWER,
    INTERIOR_UPPER,
    SADDLE,
    Equilibrium,
    is_attractor,
    positive_equilibria,
)
from .model import NondimParams, field_nondim, jacobian_nondim

__all__ = [
    "ManifoldBranch",
    "SectionMiss",
    "saddle_branches",
    "homoclinic_gap",
    "solve_homoclinic",
    "gap_section",
    "saddle_frame",
]

REACHED_ATTRACTOR = "reached-attractor"
REACHED_BOUNDARY = "reached-boundary-point"
REACHED_WINDOW_EDGE = "reached-window-edge"
LENGTH_BUDGET = "length-budget"

UP_RIGHT = "up-right"
DOWN_LEFT = "down-left"

_BOUNDARY_KINDS = ("origin", "allee-threshold", "carrying-capacity")


@dataclass
class ManifoldBranch:
    saddle: Equilibrium
    stability: str              # "stable" | "unstable"
    direction: str              # "up-right" | "down-left"
    polyline: np.ndarray        # first vertex is the saddle itself
    terminus: str
    terminus_point: str | None  # kind tag of the equilibrium reached, if any
    eigenvalue: float
    eigenvector: np.ndarray


class SectionMiss(RuntimeError):
    """A manifold branch never crossed the reference section."""

    def __init__(self, branch: str, terminus: str):
        super().__init__(f"{branch} branch missed the section (terminus: {terminus})")
        self.branch = branch
        self.terminus = terminus


def saddle_frame(p: NondimParams) -> tuple[Equilibrium, Equilibrium, np.ndarray, np.ndarray, float, float]:
    """Interior saddle, upper equilibrium and the saddle eigenframe.

    Eigenvectors are unit vectors oriented to point up-right (positive
    component along the coexistence line direction (1, 1)).
    Returns (saddle, upper, e_unstable, e_stable, lam_unstable, lam_stable).
    """
    interior = positive_equilibria(p)
    lower = next((e for e in interior if e.kind == INTERIOR_LOWER), None)
    upper = next((e for e in interior if e.kind == INTERIOR_UPPER), None)
    if lower is None or upper is None:
        raise ValueError("saddle analysis needs two interior equilibria (positive discriminant)")
    if lower.classification != SADDLE:
        raise ValueError(f"lower interior equilibrium is not a saddle: {lower.classification}")
    J = jacobian_nondim(p, lower.location)
    w, V = np.linalg.eig(J)
    w = np.real(w)
    order = np.argsort(w)  # stable first
    lam_s, lam_u = float(w[order[0]]), float(w[order[1]])
    e_s = np.real(V[:, order[0]])
    e_u = np.real(V[:, order[1]])
    for e in (e_s, e_u):
        e /= np.linalg.norm(e)
        if e[0] + e[1] < 0.0:
            e *= -1.0
    return lower, upper, e_u, e_s, lam_u, lam_s


def _branch_events(p: NondimParams, upper: Equilibrium | None, window) -> list[Event]:
    events = [
        attractor_ball_event((0.0, p.C), label="predator-only"),
        attractor_ball_event((0.0, 0.0), label="origin"),
        attractor_ball_event((p.M, 0.0), label="allee-threshold"),
        attractor_ball_event((1.0, 0.0), label="carrying-capacity"),
    ]
    if upper is not None and is_attractor(upper.classification):
        events.append(attractor_ball_event(tuple(upper.location), label="interior-upper"))
    events.append(window_exit_event(window))
    return events


def saddle_branches(
    p: NondimParams,
    eps: float = 1e-6,
    budget: float = 30000.0,
    *,
    window=None,
    tol: float = 1e-10,
) -> list[ManifoldBranch]:
    """Trace the four manifold branches of the interior saddle.

    Branches are seeded at saddle +- eps * eigenvector; unstable branches
    run forward, stable branches in reversed time.  Each branch stops at
    an equilibrium ball, at the window edge, or at the time budget, and is
    tagged accordingly.  The default window is the trapping box
    [0, 1] x [0, 1 + C].
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be > 0, got {eps}")
    saddle, upper, e_u, e_s, lam_u, lam_s = saddle_frame(p)
    if window is None:
        window = (-1e-9, 1.0, -1e-9, 1.0 + p.C)
    p1 = np.array([saddle.location.u, saddle.location.v])

    branches: list[ManifoldBranch] = []
    for stability, e, lam, sign_time in (
        ("unstable", e_u, lam_u, 1.0),
        ("stable", e_s, lam_s, -1.0),
    ):
        for orient in (1.0, -1.0):
            seed = p1 + orient * eps * e
            dirvec = orient * e
            direction = UP_RIGHT if dirvec[0] + dirvec[1] > 0.0 else DOWN_LEFT

            def f(state, _s=sign_time):
                du, dv = field_nondim(p, state)
                return _s * du, _s * dv

            traj = integrate(
                f, seed, t_max=budget, tol=tol, events=_branch_events(p, upper, window)
            )
            poly = np.vstack([p1[None, :], traj.points])
            if traj.termination == "entered-attractor-ball":
                if traj.attractor in _BOUNDARY_KINDS:
                    terminus = REACHED_BOUNDARY
                else:
                    terminus = REACHED_ATTRACTOR
                terminus_point = traj.attractor
            elif traj.termination == "left-window":
                terminus, terminus_point = REACHED_WINDOW_EDGE, None
            else:
                terminus, terminus_point = LENGTH_BUDGET, None
            branches.append(
                ManifoldBranch(
                    saddle=saddle,
                    stability=stability,
                    direction=direction,
                    polyline=poly,
                    terminus=terminus,
                    terminus_point=terminus_point,
                    eigenvalue=lam,
                    eigenvector=dirvec.copy(),
                )
            )
    return branches


def gap_section(p: NondimParams) -> tuple[np.ndarray, np.ndarray]:
    """Reference ray for the homoclinic shooting: anchor and unit direction.

    The ray starts at the upper interior equilibrium and points up-left,
    normal to the coexistence line v = u + C.  Both the forward unstable
    branch and the backward stable branch cross it while arcing over the
    upper equilibrium, in every regime between no connection and the
    broken-loop cycle regime.
    """
    interior = positive_equilibria(p)
    upper = next((e for e in interior if e.kind == INTERIOR_UPPER), None)
    if upper is None:
        raise ValueError("gap section needs the upper interior equilibrium")
    anchor = np.array([upper.location.u, upper.location.v])
    d = np.array([-1.0, 1.0]) / math.sqrt(2.0)
    return anchor, d


def _first_section_crossing(
    p: NondimParams,
    seed: np.ndarray,
    time_dir: float,
    anchor: np.ndarray,
    d: np.ndarray,
    t_max: float,
    tol: float,
) -> tuple[bool, float, str]:
    """(crossed, along-ray coordinate, terminus tag) for one branch shot."""
    code, par = nondim_kernel_args(p)
    targets = np.array([[0.0, p.C], [p.M, 0.0], [1.0, 0.0], [0.0, 0.0]])
    names = ["predator-only", "allee-threshold", "carrying-capacity", "origin"]
    win = (-0.05, 2.0, -0.05, 2.0 * (1.0 + p.C))
    status, idx, u, v, t, _ = K.advance(
        code, par, float(seed[0]), float(seed[1]), 0.0, -1.0, time_dir, t_max, tol, tol,
        targets, ATTRACTOR_BALL_RADIUS, 1.0, 1.0,
        win[0], win[1], win[2], win[3], K.WINDOW_STOP_ON_EXIT,
        1, float(anchor[0]), float(anchor[1]), float(d[0]), float(d[1]), 0, 50_000_000,
    )
    if status == K.STATUS_SECTION:
        along = d[0] * (u - anchor[0]) + d[1] * (v - anchor[1])
        return True, float(along), "section"
    if status == K.STATUS_TARGET:
        return False, math.nan, names[idx]
    if status == K.STATUS_WINDOW:
        return False, math.nan, "window-edge"
    return False, math.nan, "budget"


def homoclinic_gap(
    p: NondimParams, *, eps: float = 1e-6, t_max: float = 6000.0, tol: float = 1e-11
) -> float:
    """Signed mismatch between the unstable and stable branch crossings.

    Positive when the unstable branch crosses the reference ray farther
    from the upper equilibrium than the stable branch; zero (to tolerance)
    at the homoclinic connection.  Raises SectionMiss when a branch
    reaches an equilibrium or the window edge without crossing.
    """
    saddle, upper, e_u, e_s, _, _ = saddle_frame(p)
    anchor, d = gap_section(p)
    p1 = np.array([saddle.location.u, saddle.location.v])

    crossed, t_u, term_u = _first_section_crossing(p, p1 + eps * e_u, 1.0, anchor, d, t_max, tol)
    if not crossed:
        raise SectionMiss("unstable", term_u)
    crossed, t_s, term_s = _first_section_crossing(p, p1 + eps * e_s, -1.0, anchor, d, t_max, tol)
    if not crossed:
        # the returning branch can seed on the other side of the eigenline
        crossed, t_s, term_s2 = _first_section_crossing(
            p, p1 - eps * e_s, -1.0, anchor, d, t_max, tol
        )
        if not crossed:
            raise SectionMiss("stable", term_s)
    return t_u - t_s


def solve_homoclinic(
    M: float,
    B: float,
    S: float,
    Q: float,
    bracket: tuple[float, float],
    *,
    xtol: float = 1e-8,
    n_scan: int = 12,
    eps: float = 1e-6,
    tol: float = 1e-11,
) -> float:
    """Bisect the alternative-food level C to the homoclinic connection.

    The bracket is first scanned for a sign change of the gap (points where
    a branch misses the section are skipped); bisection then shrinks the
    bracketing interval below ``xtol`` and the midpoint is returned.
    """

    def gap_at(c: float) -> float | None:
        try:
            return homoclinic_gap(NondimParams(M=M, B=B, C=c, S=S, Q=Q), eps=eps, tol=tol)
        except (SectionMiss, ValueError):
            return None

    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError(f"bracket must satisfy lo < hi, got {bracket}")
    cs = np.linspace(lo, hi, max(2, n_scan))
    vals = [(c, gap_at(c)) for c in cs]
    vals = [(c, g) for c, g in vals if g is not None]
    pair = None
    for (c0, g0), (c1, g1) in zip(vals, vals[1:]):
        if g0 == 0.0:
            return c0
        if g0 * g1 < 0.0:
            pair = (c0, g0, c1, g1)
            break
    if pair is None:
        raise ValueError(
            f"gap does not change sign over the bracket {bracket} "
            f"({len(vals)}/{len(cs)} scan points evaluable)"
        )
    c_lo, g_lo, c_hi, g_hi = pair
    while c_hi - c_lo > xtol:
        c_mid = 0.5 * (c_lo + c_hi)
        g_mid = gap_at(c_mid)
        if g_mid is None:
            raise RuntimeError(f"gap became unevaluable at C={c_mid} during bisection")
        if g_mid == 0.0:
            return c_mid
        if g_lo * g_mid < 0.0:
            c_hi, g_hi = c_mid, g_mid
        else:
            c_lo, g_lo = c_mid, g_mid
    return float(0.5 * (c_lo + c_hi))
