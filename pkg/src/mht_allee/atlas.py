# src/mht_allee/atlas.py
"""Two-parameter bifurcation structure: fold, Hopf and homoclinic curves,
the codimension-two point organising them, and qualitative region tags.

All scalar solves are bracketing + bisection on closed-form quantities
(the fold is explicit, the Hopf condition is a scalar fixed-point problem
in C); the homoclinic curve reuses the shooting gap from ``manifolds``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .dynamics import Event, attractor_ball_event, find_limit_cycle, integrate, window_exit_event
from .equilibria import (
    CENTER_CANDIDATE,
    INTERIOR_UPPER,
    cusp_coefficients,
    discriminant,
    is_attractor,
    is_repeller,
    positive_equilibria,
    trace_factor,
)
from .manifolds import SectionMiss, homoclinic_gap, saddle_frame, solve_homoclinic
from .model import NondimParams, field_nondim, jacobian_nondim

__all__ = [
    "RegionClass",
    "BifurcationDiagram",
    "BTPoint",
    "solve_fold_c",
    "solve_hopf_c",
    "locate_bt",
    "region_classify",
    "heteroclinic_fate",
    "solve_heteroclinic_c",
    "sweep_diagram",
]

PANELS = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii")


@dataclass(frozen=True)
class RegionClass:
    """Qualitative content of one parameter region."""

    n_positive: int            # 0, 1 or 2 interior equilibria
    p2_stability: str          # "attractor" | "repeller" | "center" | "absent"
    cycle: str                 # "present" | "absent"
    panel: str                 # "i".."viii" or "undecided"


@dataclass(frozen=True)
class BTPoint:
    axis1: str
    axis1_value: float
    c_value: float
    params: NondimParams
    residual_delta: float
    residual_trace: float
    l20: float
    l11: float


@dataclass
class BifurcationDiagram:
    plane: tuple[tuple[str, float, float], tuple[str, float, float]]
    fixed: dict
    curves: dict[str, list[tuple[float, float, float]]]   # (axis1, C, residual)
    points: dict[str, tuple[float, float]]
    regions: list[tuple[tuple[float, float], RegionClass]]
    ordering_ok: bool = True


def _delta_value(M: float, B: float, Q: float, C: float) -> float:
    T = 1.0 + M - Q * (B + C)
    return T * T - 4.0 * (1.0 + Q) * (M + B * C * Q)


def solve_fold_c(M: float, B: float, Q: float) -> float:
    """Alternative-food level at which the two interior equilibria collide.

    The discriminant is quadratic in C; the admissible root (C > 0 with
    the double abscissa inside (M, 1)) is returned.  Raises ValueError
    when no admissible root exists.
    """
    alpha = 1.0 + M - Q * B
    a = Q * Q
    b = -(2.0 * alpha * Q + 4.0 * B * Q * (1.0 + Q))
    c = alpha * alpha - 4.0 * M * (1.0 + Q)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise ValueError("the discriminant has no real zero in C (no fold)")
    root = math.sqrt(disc)
    big = -(b - root) / 2.0 if b < 0.0 else -(b + root) / 2.0
    cand = sorted({big / a, c / big if big != 0.0 else math.inf})
    for cv in cand:
        if cv <= 0.0 or not math.isfinite(cv):
            continue
        u3 = (alpha - Q * cv) / (2.0 * (1.0 + Q))
        if M < u3 < 1.0:
            if abs(_delta_value(M, B, Q, cv)) > 1e-10 * (1.0 + M + Q * (B + cv)) ** 2:
                raise RuntimeError(f"fold root failed the residual check at C={cv}")
            return cv
    raise ValueError("no admissible positive fold root (double point outside (M, 1))")


def _upper_root(M: float, B: float, Q: float, C: float) -> float | None:
    T = 1.0 + M - Q * (B + C)
    val = T * T - 4.0 * (1.0 + Q) * (M + B * C * Q)
    if val <= 0.0:
        return None
    return (T + math.sqrt(val)) / (2.0 * (1.0 + Q))


def solve_hopf_c(
    M: float,
    B: float,
    S: float,
    Q: float,
    *,
    c_max: float | None = None,
    n_scan: int = 256,
) -> list[float]:
    """All C values in (0, fold) where the trace at the upper point vanishes.

    Scans the fixed-point condition f(u2(C)) = C for sign changes and
    bisects each bracket.  Every returned root has |trace| < 1e-8 and a
    positive determinant at the upper interior equilibrium.
    """
    if c_max is None:
        c_max = solve_fold_c(M, B, Q)

    def g(c: float) -> float | None:
        u2 = _upper_root(M, B, Q, c)
        if u2 is None or u2 <= 0.0:
            return None
        return (u2 * (M - 2.0 * u2 - Q * u2 + 1.0) - S * (B + u2)) / (u2 * Q) - c

    cs = np.linspace(c_max * 1e-4, c_max * (1.0 - 1e-9), n_scan)
    vals = [(c, g(c)) for c in cs]
    vals = [(c, gv) for c, gv in vals if gv is not None]
    roots: list[float] = []
    for (c0, g0), (c1, g1) in zip(vals, vals[1:]):
        if g0 == 0.0:
            roots.append(c0)
            continue
        if g0 * g1 >= 0.0:
            continue
        lo, glo, hi = c0, g0, c1
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            gm = g(mid)
            if gm is None:
                break
            if gm == 0.0:
                lo = hi = mid
                break
            if glo * gm < 0.0:
                hi = mid
            else:
                lo, glo = mid, gm
            if hi - lo < 1e-15 * max(1.0, hi):
                break
        root = 0.5 * (lo + hi)
        p = NondimParams(M=M, B=B, C=root, S=S, Q=Q)
        u2 = _upper_root(M, B, Q, root)
        J = jacobian_nondim(p, (u2, u2 + root))
        tr = float(J[0, 0] + J[1, 1])
        det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
        if abs(tr) < 1e-8 and det > 0.0:
            roots.append(root)
    return roots


def _bt_system(M: float, S: float, B: float, Q: float, C: float) -> tuple[float, float]:
    """Residuals (discriminant, f(u3) - C) of the codimension-two system."""
    delta = _delta_value(M, B, Q, C)
    u3 = (1.0 + M - Q * (B + C)) / (2.0 * (1.0 + Q))
    if u3 <= 0.0:
        return delta, math.inf
    f = (u3 * (M - 2.0 * u3 - Q * u3 + 1.0) - S * (B + u3)) / (u3 * Q)
    return delta, f - C


def locate_bt(
    fixed: dict,
    axes: tuple[str, str] = ("Q", "C"),
    a1_range: tuple[float, float] = (0.05, 2.0),
    *,
    n_scan: int = 48,
    newton_iters: int = 50,
) -> BTPoint:
    """Locate the fold/Hopf tangency point in a two-parameter plane.

    ``axes`` picks which pair varies: ("Q", "C") or ("B", "C"); the other
    three parameters come from ``fixed``.  A scan along the fold curve
    seeds a damped Newton iteration on (discriminant, trace factor); if
    Newton fails to converge the bisection along the fold curve is used
    directly.
    """
    if axes not in (("Q", "C"), ("B", "C")):
        raise ValueError(f"axes must be ('Q','C') or ('B','C'), got {axes}")
    a1name = axes[0]
    M = float(fixed["M"])
    S = float(fixed["S"])

    def fold_c(a1: float) -> float | None:
        B = a1 if a1name == "B" else float(fixed["B"])
        Q = a1 if a1name == "Q" else float(fixed["Q"])
        try:
            return solve_fold_c(M, B, Q)
        except (ValueError, RuntimeError):
            return None

    def trace_on_fold(a1: float) -> float | None:
        cv = fold_c(a1)
        if cv is None:
            return None
        B = a1 if a1name == "B" else float(fixed["B"])
        Q = a1 if a1name == "Q" else float(fixed["Q"])
        return _bt_system(M, S, B, Q, cv)[1]

    a1s = np.linspace(a1_range[0], a1_range[1], n_scan)
    vals = [(a, trace_on_fold(a)) for a in a1s]
    vals = [(a, t) for a, t in vals if t is not None and math.isfinite(t)]
    bracket = None
    for (a0, t0), (a1, t1) in zip(vals, vals[1:]):
        if t0 == 0.0 or t0 * t1 < 0.0:
            bracket = (a0, t0, a1, t1)
            break
    if bracket is None:
        raise ValueError(f"no fold/trace-zero tangency along {a1name} in {a1_range}")

    # bisection along the fold curve (also the Newton fallback)
    blo, tlo, bhi, _ = bracket
    for _ in range(200):
        mid = 0.5 * (blo + bhi)
        tm = trace_on_fold(mid)
        if tm is None:
            break
        if tm == 0.0:
            blo = bhi = mid
            break
        if tlo * tm < 0.0:
            bhi = mid
        else:
            blo, tlo = mid, tm
        if bhi - blo < 1e-14 * max(1.0, bhi):
            break
    a1_bis = 0.5 * (blo + bhi)
    c_bis = fold_c(a1_bis)

    # damped Newton polish on the full 2x2 system
    def system(a1: float, c: float) -> tuple[float, float]:
        B = a1 if a1name == "B" else float(fixed["B"])
        Q = a1 if a1name == "Q" else float(fixed["Q"])
        return _bt_system(M, S, B, Q, c)

    x = np.array([a1_bis, c_bis])
    best = x.copy()
    best_res = math.hypot(*system(*x))
    for _ in range(newton_iters):
        g0 = np.array(system(*x))
        res = float(np.hypot(*g0))
        if res < best_res:
            best_res, best = res, x.copy()
        if res < 1e-13:
            break
        h = 1e-7 * (1.0 + np.abs(x))
        Jm = np.empty((2, 2))
        for j in range(2):
            xp = x.copy()
            xp[j] += h[j]
            Jm[:, j] = (np.array(system(*xp)) - g0) / h[j]
        try:
            step = np.linalg.solve(Jm, -g0)
        except np.linalg.LinAlgError:
            break
        x = x + 0.5 * step
        if not np.all(np.isfinite(x)):
            x = best.copy()
            break
    a1_fin, c_fin = float(best[0]), float(best[1])

    B = a1_fin if a1name == "B" else float(fixed["B"])
    Q = a1_fin if a1name == "Q" else float(fixed["Q"])
    p = NondimParams(M=M, B=B, C=c_fin, S=S, Q=Q)
    delta_res, tf_res = system(a1_fin, c_fin)
    u3 = discriminant(p).u3
    trace_res = abs(Q * u3 * (u3 + c_fin) * tf_res)
    l20, l11 = cusp_coefficients(p, delta_tol=1e-6, trace_tol=1e-6)
    return BTPoint(
        axis1=a1name,
        axis1_value=a1_fin,
        c_value=c_fin,
        params=p,
        residual_delta=abs(delta_res),
        residual_trace=trace_res,
        l20=l20,
        l11=l11,
    )


def heteroclinic_fate(p: NondimParams, *, eps: float = 1e-6, budget: float = 30000.0) -> str:
    """Backward fate of the up-right stable branch of the interior saddle.

    Returns "allee-threshold" ((M,0) ball), "carrying-capacity" (passage
    within 0.15 of (1,0)), "window" (left the trapping box) or "budget".
    """
    saddle, _, _, e_s, _, _ = saddle_frame(p)
    p1 = np.array([saddle.location.u, saddle.location.v])
    seed = p1 + eps * e_s

    def f(state):
        du, dv = field_nondim(p, state)
        return -du, -dv

    events = (
        attractor_ball_event((p.M, 0.0), label="allee-threshold"),
        attractor_ball_event((1.0, 0.0), radius=0.15, label="carrying-capacity"),
        window_exit_event((-1e-9, 1.0, -1e-9, 1.0 + p.C)),
    )
    traj = integrate(f, seed, t_max=budget, tol=1e-10, events=events, record=False)
    if traj.termination == "entered-attractor-ball":
        return traj.attractor
    if traj.termination == "left-window":
        return "window"
    return "budget"


def solve_heteroclinic_c(
    M: float,
    B: float,
    S: float,
    Q: float,
    bracket: tuple[float, float],
    *,
    xtol: float = 1e-12,
) -> float:
    """C at which the backward stable branch switches from the window edge
    to the prey-threshold point, passing through the (1,0) connection."""

    def is_window(c: float) -> bool:
        fate = heteroclinic_fate(NondimParams(M=M, B=B, C=c, S=S, Q=Q))
        return fate in ("window", "carrying-capacity")

    lo, hi = float(bracket[0]), float(bracket[1])
    w_lo, w_hi = is_window(lo), is_window(hi)
    if w_lo == w_hi:
        raise ValueError(f"stable-branch fate does not switch over {bracket}")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if is_window(mid) == w_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def region_classify(p: NondimParams, *, gap_tol: float = 1e-6) -> RegionClass:
    """Assign the qualitative region tag of a parameter point.

    Combines the interior-equilibrium count, the stability of the upper
    point, the homoclinic shooting gap and reversed-time cycle detection.
    Inconclusive cycle hunts yield panel "undecided" rather than a guess.
    """
    eqs = positive_equilibria(p)
    if len(eqs) == 0:
        return RegionClass(0, "absent", "absent", "viii")
    if len(eqs) == 1:
        return RegionClass(1, "absent", "absent", "vii")

    upper = next(e for e in eqs if e.kind == INTERIOR_UPPER)
    cls = upper.classification
    if is_repeller(cls):
        return RegionClass(2, "repeller", "absent", "vi")
    if cls == CENTER_CANDIDATE:
        return RegionClass(2, "center", "absent", "undecided")

    try:
        gap = homoclinic_gap(p)
    except (SectionMiss, ValueError):
        gap = None

    if gap is not None and abs(gap) < gap_tol:
        return RegionClass(2, "attractor", "absent", "iv")
    if gap is not None and gap > 0.0:
        cycle = find_limit_cycle(p, direction="reversed")
        if cycle is None:
            return RegionClass(2, "attractor", "absent", "undecided")
        return RegionClass(2, "attractor", "present", "v")

    fate = heteroclinic_fate(p)
    panel = {"allee-threshold": "iii", "carrying-capacity": "ii", "window": "i"}.get(
        fate, "undecided"
    )
    return RegionClass(2, "attractor", "absent", panel)


def sweep_diagram(
    fixed: dict,
    axes: tuple[tuple[str, float, float], tuple[str, float, float]],
    resolution: int = 16,
    *,
    with_homoclinic: bool = True,
    with_bt: bool = True,
    with_regions: bool = True,
) -> BifurcationDiagram:
    """Assemble fold/Hopf/homoclinic polylines over a two-parameter window.

    ``axes`` is ((axis1 name, lo, hi), ("C", lo, hi)) with axis1 one of
    "Q" or "B".  Columns where a curve cannot be solved leave a gap in
    the polyline instead of failing the sweep.
    """
    (a1name, a1lo, a1hi), (a2name, c_lo, c_hi) = axes
    if a1name not in ("Q", "B") or a2name != "C":
        raise ValueError("axes must vary ('Q' or 'B') against 'C'")
    if resolution < 16:
        raise ValueError(f"resolution must be >= 16, got {resolution}")
    M = float(fixed["M"])
    S = float(fixed["S"])

    def pack(a1: float, c: float) -> NondimParams:
        B = a1 if a1name == "B" else float(fixed["B"])
        Q = a1 if a1name == "Q" else float(fixed["Q"])
        return NondimParams(M=M, B=B, C=c, S=S, Q=Q)

    curves: dict[str, list[tuple[float, float, float]]] = {
        "saddle-node": [],
        "hopf": [],
        "homoclinic": [],
    }
    per_column: dict[float, dict[str, float]] = {}
    for a1 in np.linspace(a1lo, a1hi, resolution):
        col: dict[str, float] = {}
        B = a1 if a1name == "B" else float(fixed["B"])
        Q = a1 if a1name == "Q" else float(fixed["Q"])
        try:
            c_sn = solve_fold_c(M, B, Q)
        except (ValueError, RuntimeError):
            per_column[a1] = col
            continue
        if c_lo <= c_sn <= c_hi:
            curves["saddle-node"].append((float(a1), c_sn, abs(_delta_value(M, B, Q, c_sn))))
        col["saddle-node"] = c_sn
        hopfs = solve_hopf_c(M, B, S, Q, c_max=c_sn)
        for c_h in hopfs:
            if c_lo <= c_h <= c_hi:
                u2 = _upper_root(M, B, Q, c_h)
                J = jacobian_nondim(pack(a1, c_h), (u2, u2 + c_h))
                curves["hopf"].append((float(a1), c_h, abs(float(J[0, 0] + J[1, 1]))))
        if hopfs:
            col["hopf"] = max(hopfs)
        if with_homoclinic and hopfs:
            c_h = max(hopfs)
            try:
                c_hom = solve_homoclinic(M, B, S, Q, bracket=(0.2 * c_h, c_h * (1.0 - 1e-6)))
                if c_lo <= c_hom <= c_hi:
                    res = abs(homoclinic_gap(pack(a1, c_hom)))
                    curves["homoclinic"].append((float(a1), c_hom, res))
                col["homoclinic"] = c_hom
            except (ValueError, RuntimeError):
                pass
        per_column[a1] = col

    ordering_ok = True
    for col in per_column.values():
        if "homoclinic" in col and "hopf" in col and "saddle-node" in col:
            if not col["homoclinic"] < col["hopf"] < col["saddle-node"]:
                ordering_ok = False

    points: dict[str, tuple[float, float]] = {}
    if with_bt:
        try:
            bt = locate_bt(fixed, (a1name, "C"), (a1lo, a1hi))
            points["bogdanov-takens"] = (bt.axis1_value, bt.c_value)
        except (ValueError, RuntimeError):
            pass

    regions: list[tuple[tuple[float, float], RegionClass]] = []
    if with_regions:
        mid_a1 = min(per_column, key=lambda a: abs(a - 0.5 * (a1lo + a1hi)))
        col = per_column[mid_a1]
        samples: list[float] = []
        if "homoclinic" in col:
            samples.append(0.5 * col["homoclinic"])
            if "hopf" in col:
                samples.append(0.5 * (col["homoclinic"] + col["hopf"]))
        if "hopf" in col and "saddle-node" in col:
            samples.append(0.5 * (col["hopf"] + col["saddle-node"]))
        if "saddle-node" in col:
            samples.append(min(1.2 * col["saddle-node"], c_hi))
        seen: set[str] = set()
        for c in samples:
            if not c_lo <= c <= c_hi:
                continue
            rc = region_classify(pack(mid_a1, c))
            if rc.panel not in seen:
                seen.add(rc.panel)
                regions.append(((float(mid_a1), float(c)), rc))

    return BifurcationDiagram(
        plane=axes,
        fixed=dict(fixed),
        curves=curves,
        points=points,
        regions=regions,
        ordering_ok=ordering_ok,
    )
