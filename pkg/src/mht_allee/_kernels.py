# src/mht_allee/_kernels.py
"""Compiled integration kernels shared by the trajectory, manifold and basin code.

Dormand-Prince 5(4) embedded pair; the 5th-order solution is propagated and
the 4th-order difference drives the step controller.  Event times (attractor
ball entry, window crossing, section crossing) are located by bisection on
the event sign over the accepted step, to a time accuracy of about 1e-3 of
the step size.
"""
from __future__ import annotations

import numpy as np
from numba import njit, prange

# Butcher tableau (Dormand-Prince 5(4)), shared with the pure-Python integrator.
C2, C3, C4, C5, C6 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# 5th-order minus 4th-order weights (error estimate); E7 multiplies f(y_new)
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

# field codes
FIELD_NONDIM = 0
FIELD_DIM_MULTIPLE = 1
FIELD_DIM_STRONG = 2

# advance() status codes
STATUS_TMAX = 0
STATUS_TARGET = 1
STATUS_WINDOW = 2
STATUS_SECTION = 3
STATUS_STEP_FAIL = 4
STATUS_MAX_STEPS = 5

WINDOW_NONE = 0
WINDOW_STOP_ON_EXIT = 1
WINDOW_STOP_ON_ENTER = 2

H_FLOOR = 1e-12


@njit(cache=True)
def field(code, par, u, v):
    if code == FIELD_NONDIM:
        M = par[0]
        B = par[1]
        C = par[2]
        S = par[3]
        Q = par[4]
        du = u * (u + C) * ((u - M) * (1.0 - u) - Q * (u + B) * v)
        dv = S * v * (u + B) * (u - v + C)
        return du, dv
    r = par[0]
    K = par[1]
    m = par[2]
    q = par[3]
    s = par[4]
    n = par[5]
    b = par[6]
    c = par[7]
    if code == FIELD_DIM_MULTIPLE:
        dx = u * (r / (u + b)) * (1.0 - u / K) * (u - m) - q * u * v
    else:
        dx = r * u * (1.0 - u / K) * (u - m) - q * u * v
    dy = s * v * (1.0 - v / (n * u + c))
    return dx, dy


@njit(cache=True)
def _rk_step(code, par, u, v, h, td):
    """One Dormand-Prince step of size h (time direction td = +-1).

    Returns (u_new, v_new, err_u, err_v).
    """
    k1u, k1v = field(code, par, u, v)
    k1u *= td
    k1v *= td
    k2u, k2v = field(code, par, u + h * A21 * k1u, v + h * A21 * k1v)
    k2u *= td
    k2v *= td
    k3u, k3v = field(code, par, u + h * (A31 * k1u + A32 * k2u), v + h * (A31 * k1v + A32 * k2v))
    k3u *= td
    k3v *= td
    k4u, k4v = field(
        code, par, u + h * (A41 * k1u + A42 * k2u + A43 * k3u), v + h * (A41 * k1v + A42 * k2v + A43 * k3v)
    )
    k4u *= td
    k4v *= td
    k5u, k5v = field(
        code,
        par,
        u + h * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u),
        v + h * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v),
    )
    k5u *= td
    k5v *= td
    k6u, k6v = field(
        code,
        par,
        u + h * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u),
        v + h * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v),
    )
    k6u *= td
    k6v *= td
    un = u + h * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u)
    vn = v + h * (B1 * k1v + B3 * k3v + B4 * k4v + B5 * k5v + B6 * k6v)
    k7u, k7v = field(code, par, un, vn)
    k7u *= td
    k7v *= td
    eu = h * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u)
    ev = h * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v)
    return un, vn, eu, ev


@njit(cache=True)
def _err_norm(u0, v0, u1, v1, eu, ev, rtol, atol):
    su = atol + rtol * max(abs(u0), abs(u1))
    sv = atol + rtol * max(abs(v0), abs(v1))
    return np.sqrt(0.5 * ((eu / su) ** 2 + (ev / sv) ** 2))


@njit(cache=True)
def _initial_step(code, par, u, v, td, rtol, atol):
    fu, fv = field(code, par, u, v)
    d0 = max(abs(u), abs(v), 1e-6)
    d1 = max(abs(fu), abs(fv), 1e-10)
    h = 0.01 * d0 / d1
    return min(h, 1.0)


@njit(cache=True)
def _window_sign(u, v, w0, w1, w2, w3):
    """Positive outside the window box, negative inside."""
    d = w0 - u
    if u - w1 > d:
        d = u - w1
    if w2 - v > d:
        d = w2 - v
    if v - w3 > d:
        d = v - w3
    return d


@njit(cache=True)
def advance(
    code,
    par,
    u,
    v,
    t,
    h,
    td,
    t_max,
    rtol,
    atol,
    targets,
    ball_r,
    sx,
    sy,
    w0,
    w1,
    w2,
    w3,
    wmode,
    sec_on,
    spx,
    spy,
    sdx,
    sdy,
    sdir,
    max_steps,
):
    """Integrate until a terminal event fires.

    Time direction td multiplies the field (td=-1 integrates in reversed
    time while t still grows).  Events checked per accepted step:

    * entry into any of the ``targets`` balls (elliptical, semi-axes
      ball_r*sx and ball_r*sy)           -> STATUS_TARGET, idx = ball index
    * window box crossing per ``wmode``  -> STATUS_WINDOW
    * crossing of the section line through (spx, spy) with ray direction
      (sdx, sdy), filtered by crossing direction ``sdir`` and by a positive
      along-ray coordinate                -> STATUS_SECTION

    Returns (status, idx, u, v, t, h).
    """
    n_t = targets.shape[0]
    if h <= 0.0:
        h = _initial_step(code, par, u, v, td, rtol, atol)
    # section normal (left-rotated ray direction)
    snx = -sdy
    sny = sdx

    g_win_prev = _window_sign(u, v, w0, w1, w2, w3)
    g_sec_prev = snx * (u - spx) + sny * (v - spy)

    steps = 0
    while steps < max_steps:
        steps += 1
        if t + h > t_max:
            h = t_max - t
            if h <= 0.0:
                return STATUS_TMAX, -1, u, v, t, h
        un, vn, eu, ev = _rk_step(code, par, u, v, h, td)
        err = _err_norm(u, v, un, vn, eu, ev, rtol, atol)
        if err > 1.0 or not (np.isfinite(un) and np.isfinite(vn)):
            # reject
            if not (np.isfinite(un) and np.isfinite(vn)):
                fac = 0.2
            else:
                fac = max(0.2, 0.9 * err ** -0.2)
            h *= fac
            if h < H_FLOOR:
                return STATUS_STEP_FAIL, -1, u, v, t, h
            continue

        # --- event scan over the accepted step ---
        ev_kind = -1  # 0 target, 1 window, 2 section
        ev_idx = -1
        # target balls (negative inside)
        for i in range(n_t):
            du0 = (u - targets[i, 0]) / sx
            dv0 = (v - targets[i, 1]) / sy
            du1 = (un - targets[i, 0]) / sx
            dv1 = (vn - targets[i, 1]) / sy
            g0 = du0 * du0 + dv0 * dv0 - ball_r * ball_r
            g1 = du1 * du1 + dv1 * dv1 - ball_r * ball_r
            if g0 > 0.0 and g1 <= 0.0:
                ev_kind = 0
                ev_idx = i
                break
        g_win = _window_sign(un, vn, w0, w1, w2, w3)
        if ev_kind < 0 and wmode == WINDOW_STOP_ON_EXIT and g_win_prev <= 0.0 and g_win > 0.0:
            ev_kind = 1
        if ev_kind < 0 and wmode == WINDOW_STOP_ON_ENTER and g_win_prev > 0.0 and g_win <= 0.0:
            ev_kind = 1
        g_sec = snx * (un - spx) + sny * (vn - spy)
        if ev_kind < 0 and sec_on != 0 and g_sec_prev * g_sec < 0.0:
            if sdir == 0 or (sdir > 0 and g_sec > g_sec_prev) or (sdir < 0 and g_sec < g_sec_prev):
                # provisional: check along-ray coordinate at the crossing below
                ev_kind = 2

        if ev_kind >= 0:
            # bisect the event time over the step; 30 iterations put the
            # crossing-position noise well below the cycle-return criterion
            lo = 0.0
            hi = 1.0
            for _ in range(30):
                mid = 0.5 * (lo + hi)
                um, vm, _, _ = _rk_step(code, par, u, v, h * mid, td)
                if ev_kind == 0:
                    dmu = (um - targets[ev_idx, 0]) / sx
                    dmv = (vm - targets[ev_idx, 1]) / sy
                    gm = dmu * dmu + dmv * dmv - ball_r * ball_r
                    crossed = gm <= 0.0
                elif ev_kind == 1:
                    gm = _window_sign(um, vm, w0, w1, w2, w3)
                    if wmode == WINDOW_STOP_ON_EXIT:
                        crossed = gm > 0.0
                    else:
                        crossed = gm <= 0.0
                else:
                    gm = snx * (um - spx) + sny * (vm - spy)
                    crossed = gm * g_sec_prev < 0.0
                if crossed:
                    hi = mid
                else:
                    lo = mid
            ue, ve, _, _ = _rk_step(code, par, u, v, h * hi, td)
            te = t + h * hi
            if ev_kind == 2:
                along = sdx * (ue - spx) + sdy * (ve - spy)
                if along <= 0.0:
                    # crossed the section line outside the ray: not an event,
                    # continue from the full step
                    g_win_prev = g_win
                    g_sec_prev = g_sec
                    u = un
                    v = vn
                    t += h
                    h *= min(5.0, max(0.2, 0.9 * (err + 1e-16) ** -0.2))
                    continue
                return STATUS_SECTION, -1, ue, ve, te, h
            if ev_kind == 0:
                return STATUS_TARGET, ev_idx, ue, ve, te, h
            return STATUS_WINDOW, -1, ue, ve, te, h

        # accept
        u = un
        v = vn
        t += h
        # clip numerical negatives; the axes are flow-invariant
        if u < 0.0 and u > -1e-12:
            u = 0.0
        if v < 0.0 and v > -1e-12:
            v = 0.0
        g_win_prev = g_win
        g_sec_prev = g_sec
        if t >= t_max:
            return STATUS_TMAX, -1, u, v, t, h
        h *= min(5.0, max(0.2, 0.9 * (err + 1e-16) ** -0.2))
    return STATUS_MAX_STEPS, -1, u, v, t, h


@njit(cache=True, parallel=True)
def basin_labels(
    code,
    par,
    xs,
    ys,
    targets,
    ball_r,
    sx,
    sy,
    t_max,
    rtol,
    atol,
    max_steps,
):
    """Label every (xs[i], ys[j]) cell centre by the target ball it reaches.

    Returns an int8 array of shape (len(ys), len(xs)); -1 marks undecided
    cells (horizon or step failure before reaching any ball).
    """
    nx = xs.shape[0]
    ny = ys.shape[0]
    out = np.full((ny, nx), -1, dtype=np.int8)
    for j in prange(ny):
        for i in range(nx):
            status, idx, _, _, _, _ = advance(
                code,
                par,
                xs[i],
                ys[j],
                0.0,
                -1.0,
                1.0,
                t_max,
                rtol,
                atol,
                targets,
                ball_r,
                sx,
                sy,
                0.0,
                0.0,
                0.0,
                0.0,
                WINDOW_NONE,
                0,
                0.0,
                0.0,
                0.0,
                0.0,
                0,
                max_steps,
            )
            if status == STATUS_TARGET:
                out[j, i] = idx
    return out
