# src/mht_allee/dynamics.py
"""Adaptive planar integration with event location, plus cycle detection.

``integrate`` is the flexible entry point: it accepts any planar field
callable and arbitrary sign-change events, and records the full sample
path.  The compiled kernels in ``_kernels`` implement the same
Dormand-Prince pair for the throughput-bound callers (basin grids,
manifold shooting, cycle iteration).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from . import _kernels as K
from .equilibria import (
    INTERIOR_UPPER,
    Equilibrium,
    is_attractor,
    positive_equilibria,
)
from .model import NondimParams, field_nondim

__all__ = [
    "Event",
    "Trajectory",
    "LimitCycle",
    "integrate",
    "attractor_ball_event",
    "window_exit_event",
    "verify_invariant_region",
    "InvariantRegionReport",
    "find_limit_cycle",
    "nondim_kernel_args",
]

MAX_TIME = "max-time"
ENTERED_ATTRACTOR = "entered-attractor-ball"
LEFT_WINDOW = "left-window"
CONVERGED_TO_CYCLE = "converged-to-cycle"
STEP_FAILURE = "step-failure"

ATTRACTOR_BALL_RADIUS = 1e-3
DEFAULT_T_MAX = 1e4


@dataclass
class Event:
    """Sign-change event g(t, u, v); located by bisection over the step."""

    fn: Callable[[float, float, float], float]
    terminal: bool = True
    direction: int = 0          # 0 any, +1 rising, -1 falling
    label: str = ""
    kind: str = "custom"        # "attractor" | "window" | "custom"


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray          # (n, 2), clipped to the closed first quadrant
    termination: str
    attractor: str | None = None
    events: list = dc_field(default_factory=list)   # (label, t, (u, v))
    min_component: float = 0.0  # most negative raw component seen before clipping

    @property
    def samples(self) -> list[tuple[float, tuple[float, float]]]:
        return [(float(t), (float(u), float(v))) for t, (u, v) in zip(self.times, self.points)]

    def final_state(self) -> tuple[float, float]:
        return float(self.points[-1, 0]), float(self.points[-1, 1])


def attractor_ball_event(center, radius: float = ATTRACTOR_BALL_RADIUS, label: str = "") -> Event:
    cx, cy = float(center[0]), float(center[1])

    def g(t, u, v):
        return math.hypot(u - cx, v - cy) - radius

    return Event(fn=g, terminal=True, direction=-1, label=label or f"({cx:g},{cy:g})", kind="attractor")


def window_exit_event(window) -> Event:
    x0, x1, y0, y1 = map(float, window)

    def g(t, u, v):
        return max(x0 - u, u - x1, y0 - v, v - y1)

    return Event(fn=g, terminal=True, direction=1, label="window", kind="window")


def _rk_step(f, u, v, h):
    """One Dormand-Prince step; returns (u_new, v_new, err_u, err_v)."""
    k1u, k1v = f((u, v))
    k2u, k2v = f((u + h * K.A21 * k1u, v + h * K.A21 * k1v))
    k3u, k3v = f((u + h * (K.A31 * k1u + K.A32 * k2u), v + h * (K.A31 * k1v + K.A32 * k2v)))
    k4u, k4v = f(
        (
            u + h * (K.A41 * k1u + K.A42 * k2u + K.A43 * k3u),
            v + h * (K.A41 * k1v + K.A42 * k2v + K.A43 * k3v),
        )
    )
    k5u, k5v = f(
        (
            u + h * (K.A51 * k1u + K.A52 * k2u + K.A53 * k3u + K.A54 * k4u),
            v + h * (K.A51 * k1v + K.A52 * k2v + K.A53 * k3v + K.A54 * k4v),
        )
    )
    k6u, k6v = f(
        (
            u + h * (K.A61 * k1u + K.A62 * k2u + K.A63 * k3u + K.A64 * k4u + K.A65 * k5u),
            v + h * (K.A61 * k1v + K.A62 * k2v + K.A63 * k3v + K.A64 * k4v + K.A65 * k5v),
        )
    )
    un = u + h * (K.B1 * k1u + K.B3 * k3u + K.B4 * k4u + K.B5 * k5u + K.B6 * k6u)
    vn = v + h * (K.B1 * k1v + K.B3 * k3v + K.B4 * k4v + K.B5 * k5v + K.B6 * k6v)
    k7u, k7v = f((un, vn))
    eu = h * (K.E1 * k1u + K.E3 * k3u + K.E4 * k4u + K.E5 * k5u + K.E6 * k6u + K.E7 * k7u)
    ev = h * (K.E1 * k1v + K.E3 * k3v + K.E4 * k4v + K.E5 * k5v + K.E6 * k6v + K.E7 * k7v)
    return un, vn, eu, ev


def integrate(
    field: Callable,
    s0,
    t_max: float = DEFAULT_T_MAX,
    tol: float = 1e-8,
    events: tuple[Event, ...] | list[Event] = (),
    *,
    h0: float | None = None,
    fixed_step: float | None = None,
    max_steps: int = 2_000_000,
    record: bool = True,
) -> Trajectory:
    """Integrate a planar field with adaptive steps and sign-change events.

    Parameters
    ----------
    field : callable mapping a state pair to a rate pair.
    s0 : initial state (pair-like), in the closed first quadrant.
    t_max : integration horizon.
    tol : local error tolerance per step (used as both relative and
        absolute scale; the error norm divides by tol*(1 + |state|)).
    events : Event objects; terminal events stop the run, non-terminal
        ones are recorded in ``Trajectory.events``.
    fixed_step : disable the controller and take constant steps (used by
        the convergence-order checks).

    Event times are located by bisection over the accepted step to a time
    accuracy of about 1e-3 of the step size.  States are clipped to the
    closed first quadrant; the most negative raw component encountered is
    reported in ``Trajectory.min_component``.
    """
    u, v = float(s0[0]), float(s0[1])
    t = 0.0
    ts = [t]
    pts = [(u, v)]
    hits: list = []
    min_comp = 0.0

    if fixed_step is not None:
        h = float(fixed_step)
    elif h0 is not None:
        h = float(h0)
    else:
        fu, fv = field((u, v))
        h = min(1.0, 0.01 * max(abs(u), abs(v), 1e-6) / max(abs(fu), abs(fv), 1e-10))

    g_prev = [ev.fn(t, u, v) for ev in events]
    termination = MAX_TIME
    attractor = None
    steps = 0
    while steps < max_steps:
        steps += 1
        if t + h > t_max:
            h = t_max - t
            if h <= 0.0:
                break
        un, vn, eu, ev_ = _rk_step(field, u, v, h)
        finite = math.isfinite(un) and math.isfinite(vn)
        if fixed_step is None:
            su = tol * (1.0 + max(abs(u), abs(un) if finite else abs(u)))
            sv = tol * (1.0 + max(abs(v), abs(vn) if finite else abs(v)))
            err = math.sqrt(0.5 * ((eu / su) ** 2 + (ev_ / sv) ** 2)) if finite else 2.0
            if err > 1.0:
                h *= 0.2 if not finite else max(0.2, 0.9 * err ** -0.2)
                if h < K.H_FLOOR:
                    termination = STEP_FAILURE
                    break
                continue
        else:
            err = 0.0
            if not finite:
                termination = STEP_FAILURE
                break

        t_new = t + h
        # --- events over [t, t+h] ---
        stop = False
        g_new = [ev.fn(t_new, un, vn) for ev in events]
        for i, ev in enumerate(events):
            crossed = g_prev[i] * g_new[i] < 0.0 or (g_prev[i] > 0.0 >= g_new[i]) or (
                g_prev[i] < 0.0 <= g_new[i]
            )
            if not crossed:
                continue
            rising = g_new[i] > g_prev[i]
            if ev.direction > 0 and not rising:
                continue
            if ev.direction < 0 and rising:
                continue
            lo, hi = 0.0, 1.0
            for _ in range(12):
                mid = 0.5 * (lo + hi)
                um, vm, _, _ = _rk_step(field, u, v, h * mid)
                gm = ev.fn(t + h * mid, um, vm)
                if gm * g_prev[i] < 0.0 or (g_prev[i] != 0.0 and gm == 0.0):
                    hi = mid
                else:
                    lo = mid
            ue, ve2, _, _ = _rk_step(field, u, v, h * hi)
            te = t + h * hi
            hits.append((ev.label, te, (ue, ve2)))
            if ev.terminal:
                if record:
                    ts.append(te)
                    pts.append((max(ue, 0.0), max(ve2, 0.0)))
                if ev.kind == "attractor":
                    termination = ENTERED_ATTRACTOR
                    attractor = ev.label
                elif ev.kind == "window":
                    termination = LEFT_WINDOW
                else:
                    termination = ev.label or "event"
                stop = True
                break
        if stop:
            break

        min_comp = min(min_comp, un, vn)
        u = max(un, 0.0)
        v = max(vn, 0.0)
        t = t_new
        g_prev = g_new
        if record:
            ts.append(t)
            pts.append((u, v))
        if t >= t_max:
            break
        if fixed_step is None:
            h *= min(5.0, max(0.2, 0.9 * (err + 1e-16) ** -0.2))

    return Trajectory(
        times=np.asarray(ts),
        points=np.asarray(pts),
        termination=termination,
        attractor=attractor,
        events=hits,
        min_component=min_comp,
    )


def nondim_kernel_args(p: NondimParams) -> tuple[int, np.ndarray]:
    """(field code, parameter vector) for the compiled kernels."""
    return K.FIELD_NONDIM, np.array([p.M, p.B, p.C, p.S, p.Q, 0.0, 0.0, 0.0])


@dataclass
class InvariantRegionReport:
    n_samples: int
    n_entered: int
    n_stayed: int
    witnesses: list   # (start, failure kind) for samples that failed
    passed: bool


def verify_invariant_region(
    p: NondimParams,
    n_samples: int = 500,
    *,
    seed: int = 0,
    margin: float = 1e-6,
    t_entry: float = DEFAULT_T_MAX,
    t_hold: float = 500.0,
    tol: float = 1e-9,
) -> InvariantRegionReport:
    """Check that the trapping box [0,1] x [0,1+C] absorbs random starts.

    Each start in [0,3] x [0,3(1+C)] must enter the box within ``t_entry``
    and must not leave the box inflated by ``margin`` for a further
    ``t_hold`` time units.  Failures are returned as witnesses, not raised.
    """
    code, par = nondim_kernel_args(p)
    rng = np.random.default_rng(seed)
    top = 1.0 + p.C
    starts = np.column_stack(
        [rng.uniform(0.0, 3.0, n_samples), rng.uniform(0.0, 3.0 * top, n_samples)]
    )
    no_targets = np.zeros((0, 2))
    n_entered = 0
    n_stayed = 0
    witnesses = []
    for x0, y0 in starts:
        inside = 0.0 <= x0 <= 1.0 and 0.0 <= y0 <= top
        if inside:
            u, v, t = float(x0), float(y0), 0.0
            entered = True
        else:
            status, _, u, v, t, _ = K.advance(
                code, par, float(x0), float(y0), 0.0, -1.0, 1.0, t_entry, tol, tol,
                no_targets, 0.0, 1.0, 1.0,
                0.0, 1.0, 0.0, top, K.WINDOW_STOP_ON_ENTER,
                0, 0.0, 0.0, 0.0, 0.0, 0, 50_000_000,
            )
            entered = status == K.STATUS_WINDOW
        if not entered:
            witnesses.append(((x0, y0), "never-entered"))
            continue
        n_entered += 1
        status, _, _, _, _, _ = K.advance(
            code, par, u, v, t, -1.0, 1.0, t + t_hold, tol, tol,
            no_targets, 0.0, 1.0, 1.0,
            -margin, 1.0 + margin, -margin, top + margin, K.WINDOW_STOP_ON_EXIT,
            0, 0.0, 0.0, 0.0, 0.0, 0, 50_000_000,
        )
        if status == K.STATUS_TMAX:
            n_stayed += 1
        else:
            witnesses.append(((x0, y0), "left-after-entry"))
    return InvariantRegionReport(
        n_samples=n_samples,
        n_entered=n_entered,
        n_stayed=n_stayed,
        witnesses=witnesses,
        passed=n_entered == n_samples and n_stayed == n_samples,
    )


@dataclass
class LimitCycle:
    points: np.ndarray          # closed polyline (first point repeated last)
    period: float
    stability: str              # "stable" | "unstable"
    surrounded_equilibrium: Equilibrium | None
    residual: float             # |last return - previous return| on the section

    def winding_number(self, center) -> float:
        """Signed turns of the closed polyline around ``center``."""
        rel = self.points - np.asarray(center, dtype=float)
        ang = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
        return float((ang[-1] - ang[0]) / (2.0 * math.pi))


class NoSectionCrossing(RuntimeError):
    """The orbit never returned to the Poincare section."""


def find_limit_cycle(
    p: NondimParams,
    seed=None,
    direction: str = "reversed",
    *,
    crossing_tol: float = 1e-8,
    max_revolutions: int = 3000,
    tol: float = 1e-11,
    t_max_per_leg: float = 5000.0,
) -> LimitCycle | None:
    """Hunt a limit cycle around the upper interior equilibrium.

    The Poincare section is the horizontal ray {v = v_P2, u > u_P2}.  In
    ``reversed`` time an unstable cycle attracts, so successive section
    crossings from a seed near the equilibrium converge onto it; the run
    stops when consecutive crossing abscissae differ by less than
    ``crossing_tol``.  Returns None when the iteration instead converges
    to an equilibrium or leaves the window; raises NoSectionCrossing when
    the orbit never returns to the section at all.
    """
    if direction not in ("forward", "reversed"):
        raise ValueError(f"direction must be 'forward' or 'reversed', got {direction!r}")
    interior = positive_equilibria(p)
    p2 = next((e for e in interior if e.kind == INTERIOR_UPPER), None)
    if p2 is None:
        raise ValueError("cycle search needs the upper interior equilibrium to exist")
    u2, v2 = p2.location.u, p2.location.v
    u1 = interior[0].location.u
    if seed is None:
        # try several radii: the cycle size is unknown a priori
        last_error: Exception | None = None
        for frac in (0.35, 0.15, 0.05, 0.6):
            guess = (u2 + frac * (u2 - u1), v2)
            try:
                found = find_limit_cycle(
                    p,
                    guess,
                    direction,
                    crossing_tol=crossing_tol,
                    max_revolutions=max_revolutions,
                    tol=tol,
                    t_max_per_leg=t_max_per_leg,
                )
            except NoSectionCrossing as exc:
                last_error = exc
                continue
            if found is not None:
                return found
        if last_error is not None and not isinstance(last_error, NoSectionCrossing):
            raise last_error
        return None
    su, sv = float(seed[0]), float(seed[1])

    code, par = nondim_kernel_args(p)
    td = 1.0 if direction == "forward" else -1.0
    # equilibrium balls that mark failure of the hunt
    targets = np.array([[0.0, p.C], [p.M, 0.0], [u2, v2]])
    win = (0.0, 2.0, 0.0, 2.0 * (1.0 + p.C))

    u, v, t, h = su, sv, 0.0, -1.0
    crossings_u: list[float] = []
    crossings_t: list[float] = []
    converged = False
    for _ in range(max_revolutions):
        status, idx, u, v, t, h = K.advance(
            code, par, u, v, t, h, td, t + t_max_per_leg, tol, tol,
            targets, ATTRACTOR_BALL_RADIUS, 1.0, 1.0,
            win[0], win[1], win[2], win[3], K.WINDOW_STOP_ON_EXIT,
            1, u2, v2, 1.0, 0.0, 0, 50_000_000,
        )
        if status == K.STATUS_SECTION:
            crossings_u.append(u)
            crossings_t.append(t)
            if len(crossings_u) >= 2 and abs(crossings_u[-1] - crossings_u[-2]) < crossing_tol:
                converged = True
                break
            continue
        if status in (K.STATUS_TARGET, K.STATUS_WINDOW):
            return None
        if status == K.STATUS_TMAX and not crossings_u:
            raise NoSectionCrossing(
                f"orbit from ({su:g}, {sv:g}) never crossed the section within the horizon"
            )
        return None
    if not converged:
        return None

    period = crossings_t[-1] - crossings_t[-2]
    residual = abs(crossings_u[-1] - crossings_u[-2])
    anchor = (crossings_u[-1], v2)

    # one full turn from the anchor, densely sampled, for the polyline
    sign = 1.0 if direction == "forward" else -1.0

    def f(state):
        du, dv = field_nondim(p, state)
        return sign * du, sign * dv

    traj = integrate(f, anchor, t_max=period, tol=1e-11)
    pts = np.vstack([traj.points, np.array([anchor])])
    return LimitCycle(
        points=pts,
        period=period,
        stability="stable" if direction == "forward" else "unstable",
        surrounded_equilibrium=p2,
        residual=residual,
    )
