# src/mht_allee/model.py
"""Model definitions: parameters, vector fields, Jacobians and growth laws.

Two coordinate frames are used throughout the package.  The *dimensional*
frame carries the ecological parameters (growth rates, carrying capacity,
predation rate, ...).  The *nondimensional* frame is the rescaled system

    du/dtau = u (u + C) ((u - M)(1 - u) - Q (u + B) v)
    dv/dtau = S v (u + B) (u - v + C)

obtained from the dimensional model through the state scaling
x = K u, y = n K v together with a state-dependent time rescaling.  Because
the time rescaling depends on the state, only orbits (phase curves)
correspond between the frames, not time parameterisations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MULTIPLE_ALLEE",
    "STRONG_ALLEE",
    "LOGISTIC",
    "NondimParams",
    "DimParams",
    "State",
    "nondimensionalize",
    "map_state",
    "field_nondim",
    "field_dim",
    "jacobian_nondim",
    "jacobian_dim",
    "per_capita_growth",
    "depensation_interval",
    "prey_nullcline",
]

MULTIPLE_ALLEE = "multiple-allee"
STRONG_ALLEE = "strong-allee"
LOGISTIC = "logistic"

_VARIANTS = (MULTIPLE_ALLEE, STRONG_ALLEE)


@dataclass(frozen=True)
class NondimParams:
    """Parameters of the nondimensional system.

    Attributes
    ----------
    M : rescaled Allee threshold, must lie in (0, 1).
    B : rescaled non-fertile population (> 0).
    C : rescaled alternative food level (> 0).
    S : rescaled predator growth rate (> 0).
    Q : rescaled predation rate (> 0).
    """

    M: float
    B: float
    C: float
    S: float
    Q: float

    def __post_init__(self):
        if not 0.0 < self.M < 1.0:
            raise ValueError(f"M must lie in (0, 1), got {self.M}")
        for name in ("B", "C", "S", "Q"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {val}")

    def replace(self, **kw) -> "NondimParams":
        vals = {k: getattr(self, k) for k in ("M", "B", "C", "S", "Q")}
        vals.update(kw)
        return NondimParams(**vals)


@dataclass(frozen=True)
class DimParams:
    """Parameters of the dimensional model.

    Attributes
    ----------
    r : prey intrinsic growth rate (1/time).
    K : prey carrying capacity (prey units).
    m : Allee threshold (prey units), 0 < m < K.
    q : per-capita predation rate.
    s : predator intrinsic growth rate (1/time).
    n : prey-quality coefficient in the predator carrying capacity n x + c.
    b : non-fertile prey population (ignored by the strong-Allee variant).
    c : alternative food level (predator-capacity units).
    variant : growth law, one of "multiple-allee" or "strong-allee".
    """

    r: float
    K: float
    m: float
    q: float
    s: float
    n: float
    b: float
    c: float
    variant: str = MULTIPLE_ALLEE

    def __post_init__(self):
        for name in ("r", "K", "m", "q", "s", "n", "b", "c"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {val}")
        if not self.m < self.K:
            raise ValueError(
                f"Allee threshold m must be below the carrying capacity K "
                f"(got m={self.m}, K={self.K})"
            )
        if self.variant not in _VARIANTS:
            raise ValueError(f"variant must be one of {_VARIANTS}, got {self.variant!r}")

    def replace(self, **kw) -> "DimParams":
        vals = {k: getattr(self, k) for k in ("r", "K", "m", "q", "s", "n", "b", "c", "variant")}
        vals.update(kw)
        return DimParams(**vals)


NONDIM = "nondimensional"
DIM = "dimensional"


@dataclass(frozen=True)
class State:
    """A point of the phase plane, tagged with its coordinate frame."""

    u: float
    v: float
    frame: str = NONDIM

    def __post_init__(self):
        if self.frame not in (NONDIM, DIM):
            raise ValueError(f"frame must be {NONDIM!r} or {DIM!r}, got {self.frame!r}")
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError(f"state components must be finite, got ({self.u}, {self.v})")
        if self.u < 0.0 or self.v < 0.0:
            raise ValueError(f"state must lie in the first quadrant, got ({self.u}, {self.v})")

    def __iter__(self):
        yield self.u
        yield self.v


def _uv(state) -> tuple[float, float]:
    u, v = state
    return float(u), float(v)


def nondimensionalize(p: DimParams) -> NondimParams:
    """Rescale dimensional parameters to the nondimensional five-tuple.

    (M, B, C, S, Q) = (m/K, b/K, c/(nK), s/r, q n K / r).  Raises if
    m >= K, which would push M out of (0, 1).
    """
    return NondimParams(
        M=p.m / p.K,
        B=p.b / p.K,
        C=p.c / (p.n * p.K),
        S=p.s / p.r,
        Q=p.q * p.n * p.K / p.r,
    )


def map_state(p: DimParams, s: State) -> State:
    """Map a state between frames: (x, y) = (K u, n K v) and its inverse.

    Only the state component of the frame change is applied; time is not
    mapped because the time rescaling between frames is state dependent.
    """
    if s.frame == NONDIM:
        return State(p.K * s.u, p.n * p.K * s.v, frame=DIM)
    return State(s.u / p.K, s.v / (p.n * p.K), frame=NONDIM)


def field_nondim(p: NondimParams, state) -> tuple[float, float]:
    """Right-hand side of the nondimensional system at ``state``.

    Factored polynomial form; exact zeros at every equilibrium.
    """
    u, v = _uv(state)
    du = u * (u + p.C) * ((u - p.M) * (1.0 - u) - p.Q * (u + p.B) * v)
    dv = p.S * v * (u + p.B) * (u - v + p.C)
    return du, dv


def field_dim(p: DimParams, state) -> tuple[float, float]:
    """Right-hand side of the dimensional model at ``state``.

    The prey equation uses the growth law selected by ``p.variant``; both
    variants share the predator equation with carrying capacity n x + c.
    """
    x, y = _uv(state)
    cap = p.n * x + p.c
    if cap <= 0.0:
        raise ValueError(f"predator carrying capacity n*x + c must be > 0, got {cap}")
    if p.variant == MULTIPLE_ALLEE:
        dx = x * (p.r / (x + p.b)) * (1.0 - x / p.K) * (x - p.m) - p.q * x * y
    else:
        dx = p.r * x * (1.0 - x / p.K) * (x - p.m) - p.q * x * y
    dy = p.s * y * (1.0 - y / cap)
    return dx, dy


def jacobian_nondim(p: NondimParams, state) -> np.ndarray:
    """Analytic Jacobian of the nondimensional field.

    Derived directly from the factored vector field:

        J11 = (2u + C) g + u (u + C) g_u,   g   = (u - M)(1 - u) - Q (u + B) v,
        J12 = -Q u (u + B)(u + C),          g_u = (1 + M - 2u) - Q v,
        J21 = S v (B + C + 2u - v),
        J22 = S (u + B)(u + C - 2v).
    """
    u, v = _uv(state)
    M, B, C, S, Q = p.M, p.B, p.C, p.S, p.Q
    g = (u - M) * (1.0 - u) - Q * (u + B) * v
    gu = (1.0 + M - 2.0 * u) - Q * v
    return np.array(
        [
            [(2.0 * u + C) * g + u * (u + C) * gu, -Q * u * (u + B) * (u + C)],
            [S * v * (B + C + 2.0 * u - v), S * (u + B) * (u + C - 2.0 * v)],
        ]
    )


def jacobian_dim(p: DimParams, state) -> np.ndarray:
    """Analytic Jacobian of the dimensional field (variant aware)."""
    x, y = _uv(state)
    cap = p.n * x + p.c
    if p.variant == MULTIPLE_ALLEE:
        # prey growth T(x) = x (1 - x/K)(x - m)/(x + b); quotient rule
        num = x * (1.0 - x / p.K) * (x - p.m)
        dnum = (1.0 - x / p.K) * (x - p.m) + x * (-(x - p.m) / p.K + (1.0 - x / p.K))
        dT = (dnum * (x + p.b) - num) / (x + p.b) ** 2
        j11 = p.r * dT - p.q * y
    else:
        dnum = (1.0 - x / p.K) * (x - p.m) + x * (-(x - p.m) / p.K + (1.0 - x / p.K))
        j11 = p.r * dnum - p.q * y
    j12 = -p.q * x
    j21 = p.s * y * y * p.n / (cap * cap)
    j22 = p.s * (1.0 - 2.0 * y / cap)
    return np.array([[j11, j12], [j21, j22]])


def per_capita_growth(variant: str, p: DimParams, x: float) -> float:
    """Per-capita prey growth rate under the selected growth law.

    "logistic"       -> r (1 - x/K)
    "strong-allee"   -> r (1 - x/K)(x - m)
    "multiple-allee" -> r (1 - x/K)(x - m)/(x + b)
    """
    if x < 0.0:
        raise ValueError(f"prey density must be >= 0, got {x}")
    base = p.r * (1.0 - x / p.K)
    if variant == LOGISTIC:
        return base
    if variant == STRONG_ALLEE:
        return base * (x - p.m)
    if variant == MULTIPLE_ALLEE:
        if x + p.b <= 0.0:
            raise ValueError("x + b must be > 0 for the multiple-Allee growth law")
        return base * (x - p.m) / (x + p.b)
    raise ValueError(f"unknown growth law {variant!r}")


def depensation_interval(variant: str, b: float, K: float, m: float) -> tuple[float, float]:
    """Prey-density interval on which per-capita growth is positive and rising.

    The interval starts at the Allee threshold m.  Its upper endpoint is the
    maximiser of the per-capita growth: (K + m)/2 for the strong Allee law and
    -b + sqrt((b + K)(b + m)) for the multiple-Allee law.  The multiple-Allee
    endpoint never exceeds the strong-Allee one.
    """
    if not 0.0 < m < K:
        raise ValueError(f"need 0 < m < K, got m={m}, K={K}")
    if variant == STRONG_ALLEE:
        return m, 0.5 * (K + m)
    if variant == MULTIPLE_ALLEE:
        if b <= 0.0:
            raise ValueError(f"b must be > 0 for the multiple-Allee law, got {b}")
        return m, -b + math.sqrt((b + K) * (b + m))
    raise ValueError(f"unknown growth law {variant!r}")


def prey_nullcline(p: NondimParams, u: float) -> float:
    """Nontrivial prey nullcline v = (u - M)(1 - u) / (Q (u + B))."""
    return (u - p.M) * (1.0 - u) / (p.Q * (u + p.B))
