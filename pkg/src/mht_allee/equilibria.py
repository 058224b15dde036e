# src/mht_allee/equilibria.py
"""Closed-form equilibria, eigenvalue classification and local bifurcation data.

Interior equilibria lie on the line v = u + C at roots of

    (1 + Q) u^2 - (1 + M - Q(B + C)) u + (M + B C Q) = 0,

so their number is governed by the discriminant of that quadratic.  The
four boundary equilibria (0,0), (M,0), (1,0) and (0,C) exist for every
admissible parameter set and their stability never changes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import NondimParams, State, field_nondim, jacobian_nondim

__all__ = [
    "Discriminant",
    "Equilibrium",
    "discriminant",
    "positive_equilibria",
    "boundary_equilibria",
    "classify",
    "eigenvalues",
    "trace_factor",
    "sotomayor_quantities",
    "cusp_coefficients",
    "is_attractor",
    "is_repeller",
    "delta_tolerance",
]

# equilibrium kinds
ORIGIN = "origin"
ALLEE_THRESHOLD = "allee-threshold"
CARRYING_CAPACITY = "carrying-capacity"
PREDATOR_ONLY = "predator-only"
INTERIOR_LOWER = "interior-lower"
INTERIOR_UPPER = "interior-upper"
INTERIOR_DOUBLE = "interior-double"

# classification tags
SADDLE = "saddle"
REPELLER_NODE = "repeller-node"
REPELLER_FOCUS = "repeller-focus"
ATTRACTOR_NODE = "attractor-node"
ATTRACTOR_FOCUS = "attractor-focus"
SN_ATTRACTOR = "nonhyperbolic-saddle-node-attractor"
SN_REPELLER = "nonhyperbolic-saddle-node-repeller"
CUSP = "cusp"
CENTER_CANDIDATE = "center-candidate"

_ATTRACTORS = (ATTRACTOR_NODE, ATTRACTOR_FOCUS)
_REPELLERS = (REPELLER_NODE, REPELLER_FOCUS)

RESIDUAL_TOL = 1e-10


def is_attractor(classification: str) -> bool:
    return classification in _ATTRACTORS


def is_repeller(classification: str) -> bool:
    return classification in _REPELLERS


@dataclass(frozen=True)
class Discriminant:
    """Discriminant of the interior-equilibrium quadratic and its roots.

    ``value > 0`` with positive roots: two interior equilibria at
    u1 < u2, necessarily inside (M, 1); ``value = 0`` (to tolerance): a
    double root at u3; otherwise u1 = u2 = None.  Real but nonpositive
    roots (possible when Q (B + C) outweighs 1 + M) are reported as None:
    they carry no first-quadrant equilibria.  u3 is always the vertex
    abscissa (1 + M - Q(B + C)) / (2 (1 + Q)).
    """

    value: float
    u1: float | None
    u2: float | None
    u3: float


@dataclass(frozen=True)
class Equilibrium:
    location: State
    kind: str
    eigenvalues: tuple[complex, complex]
    classification: str


def delta_tolerance(p: NondimParams) -> float:
    """Scale-aware tolerance used to decide whether the discriminant is zero."""
    return 1e-8 * (1.0 + p.M + p.Q * (p.B + p.C)) ** 2


def discriminant(p: NondimParams) -> Discriminant:
    """Evaluate the interior-equilibrium discriminant and its roots.

    Roots are computed with the product-of-roots form of the quadratic
    formula so the smaller root does not suffer cancellation near a double
    root.
    """
    T = 1.0 + p.M - p.Q * (p.B + p.C)   # sum-of-roots numerator
    P = p.M + p.B * p.C * p.Q           # product-of-roots numerator
    a = 1.0 + p.Q
    value = T * T - 4.0 * a * P
    u3 = T / (2.0 * a)
    tol = delta_tolerance(p)
    if value < -tol or T <= 0.0:
        # complex roots, or a real pair on the negative axis (T <= 0):
        # either way no first-quadrant equilibria
        return Discriminant(value=value, u1=None, u2=None, u3=u3)
    if value <= tol:
        return Discriminant(value=value, u1=u3, u2=u3, u3=u3)
    root = math.sqrt(value)
    big = 0.5 * (T + root)
    u2 = big / a
    u1 = P / big
    return Discriminant(value=value, u1=u1, u2=u2, u3=u3)


def eigenvalues(J: np.ndarray) -> tuple[complex, complex]:
    """Eigenvalues of a real 2x2 matrix from its trace and determinant."""
    tr = float(J[0, 0] + J[1, 1])
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        root = math.sqrt(disc)
        return complex(0.5 * (tr - root)), complex(0.5 * (tr + root))
    root = math.sqrt(-disc)
    return complex(0.5 * tr, -0.5 * root), complex(0.5 * tr, 0.5 * root)


def classify(p: NondimParams, location, *, residual_tol: float | None = None) -> str:
    """Classify a fixed point by the eigenstructure of the Jacobian there.

    Tolerances scale with the magnitude of the Jacobian entries so the
    nonhyperbolic branches (fold, cusp, Hopf boundary) are detected
    reproducibly.  Raises ValueError if ``location`` is not a fixed point
    to within ``residual_tol`` (default 1e-10 times 1 + |location|).
    """
    if isinstance(location, Equilibrium):
        location = location.location
    u, v = (float(c) for c in location)
    if residual_tol is None:
        residual_tol = RESIDUAL_TOL * (1.0 + math.hypot(u, v))
    du, dv = field_nondim(p, (u, v))
    if math.hypot(du, dv) >= residual_tol:
        raise ValueError(
            f"({u}, {v}) is not a fixed point: field residual is ({du:.3e}, {dv:.3e})"
        )
    J = jacobian_nondim(p, (u, v))
    scale = max(abs(J[0, 0]), abs(J[0, 1]), abs(J[1, 0]), abs(J[1, 1]), 1e-300)
    tol_det = 1e-8 * scale * scale
    tol_tr = 1e-8 * scale
    tr = float(J[0, 0] + J[1, 1])
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    if abs(det) <= tol_det:
        if abs(tr) <= tol_tr:
            return CUSP
        return SN_ATTRACTOR if tr < 0.0 else SN_REPELLER
    if det < 0.0:
        return SADDLE
    if abs(tr) <= tol_tr:
        return CENTER_CANDIDATE
    focus = tr * tr - 4.0 * det < 0.0
    if tr < 0.0:
        return ATTRACTOR_FOCUS if focus else ATTRACTOR_NODE
    return REPELLER_FOCUS if focus else REPELLER_NODE


def _make(p: NondimParams, u: float, v: float, kind: str, residual_tol: float | None = None) -> Equilibrium:
    loc = State(u, v)
    return Equilibrium(
        location=loc,
        kind=kind,
        eigenvalues=eigenvalues(jacobian_nondim(p, loc)),
        classification=classify(p, loc, residual_tol=residual_tol),
    )


def boundary_equilibria(p: NondimParams) -> list[Equilibrium]:
    """The four axis equilibria, in the order (0,0), (M,0), (1,0), (0,C)."""
    return [
        _make(p, 0.0, 0.0, ORIGIN),
        _make(p, p.M, 0.0, ALLEE_THRESHOLD),
        _make(p, 1.0, 0.0, CARRYING_CAPACITY),
        _make(p, 0.0, p.C, PREDATOR_ONLY),
    ]


def positive_equilibria(p: NondimParams) -> list[Equilibrium]:
    """Interior equilibria on v = u + C: two, one (double) or none.

    When the discriminant vanishes only to within its tolerance (parameters
    rounded off the exact fold), the double point is not a root to machine
    precision; its admissible field residual is the vertex defect
    u3 (u3 + C) |discriminant| / (4 (1 + Q)).
    """
    d = discriminant(p)
    if d.u1 is None:
        return []
    if d.u1 == d.u2 == d.u3 and d.value <= delta_tolerance(p):
        # Declared a double root by the discriminant tolerance, so the
        # determinant is treated as exactly zero: classify on the
        # nonhyperbolic branch by the trace sign.
        u3 = d.u3
        loc = State(u3, u3 + p.C)
        J = jacobian_nondim(p, loc)
        scale = max(abs(J[0, 0]), abs(J[0, 1]), abs(J[1, 0]), abs(J[1, 1]), 1e-300)
        tr = float(J[0, 0] + J[1, 1])
        if abs(tr) <= 1e-8 * scale:
            cls = CUSP
        else:
            cls = SN_ATTRACTOR if tr < 0.0 else SN_REPELLER
        return [
            Equilibrium(
                location=loc, kind=INTERIOR_DOUBLE, eigenvalues=eigenvalues(J), classification=cls
            )
        ]
    return [
        _make(p, d.u1, d.u1 + p.C, INTERIOR_LOWER),
        _make(p, d.u2, d.u2 + p.C, INTERIOR_UPPER),
    ]


def trace_factor(p: NondimParams, u: float) -> float:
    """The factor f(u) whose sign against C decides interior stability.

        f(u) = (u (M - 2u - Qu + 1) - S (B + u)) / (u Q)

    At an interior equilibrium (u, u + C) the Jacobian trace equals
    Q u (u + C) (f(u) - C), so sign(trace) = sign(f(u) - C).
    """
    if u <= 0.0:
        raise ValueError(f"f(u) requires u > 0, got {u}")
    return (u * (p.M - 2.0 * u - p.Q * u + 1.0) - p.S * (p.B + u)) / (u * p.Q)


# --- second-derivative helpers for the fold/cusp quantities -----------------
# The u-equation splits as F1 = phi(u) - psi(u) v with
#   phi(u) = u (u + C)(u - M)(1 - u),  psi(u) = Q u (u + B)(u + C).


def _phi_dd(p: NondimParams, u: float) -> float:
    return -12.0 * u * u + 6.0 * (1.0 + p.M - p.C) * u + 2.0 * (p.C * (1.0 + p.M) - p.M)


def _psi_d(p: NondimParams, u: float) -> float:
    return p.Q * (3.0 * u * u + 2.0 * (p.B + p.C) * u + p.B * p.C)


def _psi_dd(p: NondimParams, u: float) -> float:
    return p.Q * (6.0 * u + 2.0 * (p.B + p.C))


def _second_directional(p: NondimParams, u: float, v: float) -> tuple[float, float]:
    """Componentwise second derivative of the field along the direction (1, 1)."""
    d2f1 = _phi_dd(p, u) - _psi_dd(p, u) * v - 2.0 * _psi_d(p, u)
    d2f2 = 2.0 * p.S * v + 2.0 * p.S * (2.0 * u - 2.0 * v + p.C + p.B) - 2.0 * p.S * (u + p.B)
    return d2f1, d2f2


def sotomayor_quantities(p: NondimParams, *, delta_tol: float | None = None) -> tuple[float, float]:
    """Fold nondegeneracy data at the double interior equilibrium.

    With U = (1, 1) the right null eigenvector of the Jacobian at the double
    point and W the left null eigenvector normalised to second component 1,
    returns (W . dF/dQ, W . D2F(U, U)).  Both are nonzero at a nondegenerate
    fold in the predation rate Q.  Requires the discriminant to vanish (to
    ``delta_tol``) and the double point to lie in (0, 1).
    """
    if delta_tol is None:
        delta_tol = 1e-4 * (1.0 + p.M + p.Q * (p.B + p.C)) ** 2
    d = discriminant(p)
    if abs(d.value) > delta_tol:
        raise ValueError(
            f"fold quantities need a vanishing discriminant: |{d.value:.3e}| > {delta_tol:.3e}"
        )
    u3 = d.u3
    if not 0.0 < u3 < 1.0:
        raise ValueError(f"double equilibrium abscissa must lie in (0, 1), got {u3}")
    v3 = u3 + p.C
    w1 = -p.S / (p.Q * u3)  # = -2 S (1+Q) / (Q (1 + M - Q(B+C)))
    fq1 = -u3 * (u3 + p.B) * v3 * v3
    wfq = w1 * fq1
    d2f1, d2f2 = _second_directional(p, u3, v3)
    wd2f = w1 * d2f1 + d2f2
    return wfq, wd2f


def cusp_coefficients(
    p: NondimParams, *, delta_tol: float | None = None, trace_tol: float = 1e-4
) -> tuple[float, float]:
    """Quadratic normal-form coefficients at a doubly degenerate interior point.

    At a parameter point where both the discriminant and the Jacobian trace
    vanish, the flow near the double equilibrium reduces to

        dU1 = V1,   dV1 = L20 U1^2 + L11 U1 V1 + higher order.

    The pair (L20, L11) is defined up to a simultaneous sign flip; the
    representative with L20 > 0 is returned.  |L11| > 0 certifies a
    codimension-two cusp.

    Derivation: translate the double point to the origin, apply the affine
    map (X, Y) -> (X, k (X - Y)) with k the top-left Jacobian entry (the
    Jacobian is k [[1, -1], [1, -1]] there), and reduce the resulting
    quadratic jet with the standard planar normal-form step
    (b20, b11 + 2 a20).
    """
    if delta_tol is None:
        delta_tol = 1e-4 * (1.0 + p.M + p.Q * (p.B + p.C)) ** 2
    d = discriminant(p)
    if abs(d.value) > delta_tol:
        raise ValueError(
            f"cusp coefficients need a vanishing discriminant: |{d.value:.3e}| > {delta_tol:.3e}"
        )
    u3 = d.u3
    if not 0.0 < u3 < 1.0:
        raise ValueError(f"double equilibrium abscissa must lie in (0, 1), got {u3}")
    if abs(trace_factor(p, u3) - p.C) > trace_tol:
        raise ValueError(
            "cusp coefficients need a vanishing trace at the double point: "
            f"|f(u3) - C| = {abs(trace_factor(p, u3) - p.C):.3e} > {trace_tol:.3e}"
        )
    v3 = u3 + p.C
    k = p.S * (u3 + p.B) * v3
    # quadratic Taylor coefficients of the shifted field in (X, Y)
    p20 = 0.5 * (_phi_dd(p, u3) - _psi_dd(p, u3) * v3)
    p11 = -_psi_d(p, u3)
    q20 = p.S * v3
    q11 = p.S * (p.B - p.C)
    q02 = -p.S * (u3 + p.B)
    # after (X, Y) -> (U, V) = (X, k(X - Y)):
    a20 = p20 + p11
    b20 = k * ((p20 - q20) + (p11 - q11) - q02)
    b11 = (q11 - p11) + 2.0 * q02
    l20 = b20
    l11 = b11 + 2.0 * a20
    if l20 < 0.0:
        l20, l11 = -l20, -l11
    return l20, l11
