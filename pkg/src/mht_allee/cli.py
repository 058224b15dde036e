# src/mht_allee/cli.py
"""Command-line interface: reproducible experiments with file outputs.

Commands: equilibria | simulate | portrait | diagram | basin | homoclinic | scan-b.
Parameters come from a flat key=value config file and/or repeated
--param KEY=VAL flags (flags win).  Exit codes: 0 ok, 2 invalid input,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .atlas import sweep_diagram
from .basins import (
    LABEL_COEXISTENCE,
    LABEL_PREDATOR_ONLY,
    attractors_of,
    basin_area,
    compute_basin,
    scan_b,
    separatrix_polygon,
)
from .dynamics import attractor_ball_event, find_limit_cycle, integrate
from .equilibria import SADDLE, boundary_equilibria, discriminant, positive_equilibria
from .manifolds import saddle_branches, solve_homoclinic
from .model import DimParams, NondimParams, field_dim, field_nondim
from .render import render_basin, render_diagram, render_portrait

NONDIM_KEYS = ("M", "B", "C", "S", "Q")
DIM_KEYS = ("r", "K", "m", "q", "s", "n", "b", "c")


def _parse_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line is not 'key = value': {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        out[key] = val
    return out


def _build_params(kv: dict[str, str]) -> NondimParams | DimParams:
    has_nondim = any(k in kv for k in NONDIM_KEYS)
    has_dim = any(k in kv for k in DIM_KEYS if k in kv)
    if has_nondim and has_dim:
        raise ValueError(
            "provide exactly one parameter family: "
            f"rescaled {NONDIM_KEYS} or dimensional {DIM_KEYS}"
        )
    if has_nondim:
        missing = [k for k in NONDIM_KEYS if k not in kv]
        if missing:
            raise ValueError(f"missing rescaled parameters: {missing}")
        return NondimParams(**{k: float(kv[k]) for k in NONDIM_KEYS})
    if has_dim:
        missing = [k for k in DIM_KEYS if k not in kv]
        if missing:
            raise ValueError(f"missing dimensional parameters: {missing}")
        vals = {k: float(kv[k]) for k in DIM_KEYS}
        return DimParams(**vals, variant=kv.get("variant", "multiple-allee"))
    raise ValueError("no model parameters given (use --param or --config)")


def _param_header(params) -> str:
    if isinstance(params, NondimParams):
        items = [(k, getattr(params, k)) for k in NONDIM_KEYS]
    else:
        items = [(k, getattr(params, k)) for k in DIM_KEYS] + [("variant", params.variant)]
    return " ".join(f"{k}={v!r}" if isinstance(v, str) else f"{k}={v!r}" for k, v in items)


def _write_csv(path: Path, command: str, params, header: list[str], rows, extra: list[str] = ()):
    lines = [f"# mht-allee {__version__}", f"# command: {command}"]
    if params is not None:
        lines.append(f"# {_param_header(params)}")
    lines.extend(f"# {e}" for e in extra)
    lines.append(",".join(header))
    for row in rows:
        lines.append(
            ",".join(repr(float(x)) if isinstance(x, (float, np.floating)) else str(x) for x in row)
        )
    path.write_text("\n".join(lines) + "\n")


def _window(args, params) -> tuple[float, float, float, float]:
    if args.window:
        vals = [float(x) for x in args.window.split(",")]
        if len(vals) != 4:
            raise ValueError("--window needs u0,u1,v0,v1")
        return tuple(vals)  # type: ignore[return-value]
    if isinstance(params, NondimParams):
        return (0.0, 1.0, 0.0, 1.0 + params.C)
    return (0.0, params.K, 0.0, params.n * params.K + params.c)


def _resolution(args, default=(256, 256)) -> tuple[int, int]:
    if not args.res:
        return default
    vals = [int(x) for x in args.res.split(",")]
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2:
        raise ValueError("--res needs NX,NY")
    if min(vals) < 16:
        raise ValueError(f"resolution must be >= 16, got {vals}")
    return vals[0], vals[1]


def _nondim_of(params) -> NondimParams:
    if isinstance(params, NondimParams):
        return params
    from .model import nondimensionalize

    return nondimensionalize(params)


# --- commands ----------------------------------------------------------------


def cmd_equilibria(args, params, out: Path) -> int:
    p = _nondim_of(params)
    d = discriminant(p)
    eqs = boundary_equilibria(p) + positive_equilibria(p)
    print(f"discriminant = {d.value!r}")
    if not positive_equilibria(p):
        print("no positive equilibria")
    rows = []
    for e in eqs:
        l1, l2 = e.eigenvalues
        print(
            f"{e.kind:18s} ({e.location.u:.8f}, {e.location.v:.8f})  "
            f"eig ({l1.real:+.6f}{l1.imag:+.6f}j, {l2.real:+.6f}{l2.imag:+.6f}j)  {e.classification}"
        )
        rows.append(
            (e.kind, e.location.u, e.location.v, l1.real, l1.imag, l2.real, l2.imag, e.classification)
        )
    _write_csv(
        out / "equilibria.csv",
        "equilibria",
        p,
        ["kind", "u", "v", "eig1_re", "eig1_im", "eig2_re", "eig2_im", "classification"],
        rows,
        extra=[f"discriminant={d.value!r}"],
    )
    return 0


def cmd_simulate(args, params, out: Path) -> int:
    if not args.start:
        raise ValueError("simulate needs --start u0,v0")
    u0, v0 = (float(x) for x in args.start.split(","))
    field = (lambda s: field_nondim(params, s)) if isinstance(params, NondimParams) else (
        lambda s: field_dim(params, s)
    )
    names = {LABEL_PREDATOR_ONLY: "predator-only", LABEL_COEXISTENCE: "coexistence"}
    events = [
        attractor_ball_event(loc, label=names[lab]) for lab, loc in attractors_of(params)
    ]
    traj = integrate(field, (u0, v0), t_max=args.tmax, tol=args.tol, events=events)
    rows = [(float(t), float(u), float(v)) for t, (u, v) in zip(traj.times, traj.points)]
    _write_csv(
        out / "trajectory.csv",
        "simulate",
        params,
        ["t", "u", "v"],
        rows,
        extra=[f"start={u0!r},{v0!r}", f"termination={traj.termination}", f"attractor={traj.attractor}"],
    )
    print(f"{len(rows)} samples, termination: {traj.termination}"
          + (f" ({traj.attractor})" if traj.attractor else ""))
    return 0


def cmd_portrait(args, params, out: Path) -> int:
    p = _nondim_of(params)
    window = _window(args, p)
    branches = []
    interior = positive_equilibria(p)
    if len(interior) == 2 and interior[0].classification == SADDLE:
        branches = saddle_branches(p, window=window)
    basin = None
    if args.res:
        nx, ny = _resolution(args)
        basin = compute_basin(p, window, nx, ny, t_max=args.tmax, tol=args.tol)
    cycle = find_limit_cycle(p) if args.with_cycle else None
    trajectories = []
    for frac in (0.25, 0.5, 0.75):
        start = (window[0] + frac * (window[1] - window[0]), window[2] + 0.8 * (window[3] - window[2]))
        events = [attractor_ball_event(loc, label=str(lab)) for lab, loc in attractors_of(p)]
        trajectories.append(
            integrate(lambda s: field_nondim(p, s), start, t_max=min(args.tmax, 2000.0),
                      tol=args.tol, events=events)
        )
    render_portrait(
        out / "portrait.svg", p, window=window, branches=branches,
        trajectories=trajectories, cycle=cycle, basin=basin,
    )
    rows = []
    for i, br in enumerate(branches):
        for u, v in br.polyline:
            rows.append((i, br.stability, br.direction, br.terminus, float(u), float(v)))
    _write_csv(
        out / "portrait_branches.csv",
        "portrait",
        p,
        ["branch", "stability", "direction", "terminus", "u", "v"],
        rows,
    )
    print(f"portrait written to {out / 'portrait.svg'} ({len(branches)} manifold branches)")
    return 0


def cmd_diagram(args, params, out: Path) -> int:
    p = _nondim_of(params)
    axes_name = args.axes.upper()
    if axes_name not in ("QC", "BC"):
        raise ValueError("--axes must be QC or BC")
    a1 = "Q" if axes_name == "QC" else "B"
    a1_lo, a1_hi = (float(x) for x in args.a1_range.split(","))
    c_lo, c_hi = (float(x) for x in args.c_range.split(","))
    res = _resolution(args, default=(16, 16))[0]
    fixed = {"M": p.M, "S": p.S, ("B" if a1 == "Q" else "Q"): getattr(p, "B" if a1 == "Q" else "Q")}
    diagram = sweep_diagram(fixed, ((a1, a1_lo, a1_hi), ("C", c_lo, c_hi)), resolution=res)
    rows = []
    for label, pts in sorted(diagram.curves.items()):
        for a, c, r in pts:
            rows.append((label, float(a), float(c), float(r)))
    for label, (a, c) in sorted(diagram.points.items()):
        rows.append((label, float(a), float(c), 0.0))
    _write_csv(
        out / "diagram.csv",
        "diagram",
        p,
        ["curve", a1, "C", "residual"],
        rows,
        extra=[f"fixed={fixed!r}", f"ordering_ok={diagram.ordering_ok}"],
    )
    render_diagram(out / "diagram.svg", diagram)
    n = {k: len(v) for k, v in diagram.curves.items()}
    print(f"diagram written; curve points: {n}; regions: {[rc.panel for _, rc in diagram.regions]}")
    if any(len(v) == 0 for v in diagram.curves.values()):
        print("note: some curves have no points in the requested window")
    return 0


def cmd_basin(args, params, out: Path) -> int:
    window = _window(args, params)
    nx, ny = _resolution(args)
    grid = compute_basin(params, window, nx, ny, t_max=args.tmax, tol=args.tol)
    rows = [
        (i, j, int(grid.labels[j, i]))
        for j in range(grid.ny)
        for i in range(grid.nx)
    ]
    _write_csv(
        out / "basin.csv",
        "basin",
        params,
        ["ix", "iy", "label"],
        rows,
        extra=[
            f"window={window!r}",
            f"labels: 0=to-(0,C) 1=to-P2 -1=undecided",
            f"area_to_0C={basin_area(grid, LABEL_PREDATOR_ONLY)!r}",
            f"area_to_P2={basin_area(grid, LABEL_COEXISTENCE)!r}",
            f"undecided_fraction={grid.undecided_fraction!r}",
        ],
    )
    separatrix = None
    p_nd = params if isinstance(params, NondimParams) else None
    if p_nd is not None:
        interior = positive_equilibria(p_nd)
        if len(interior) == 2 and interior[0].classification == SADDLE:
            try:
                separatrix = separatrix_polygon(p_nd, window)
            except (ValueError, RuntimeError):
                separatrix = None
    render_basin(out / "basin.svg", grid, p=p_nd, separatrix=separatrix)
    print(
        f"basin {nx}x{ny}: to-P2 area {basin_area(grid, LABEL_COEXISTENCE)!r}, "
        f"to-(0,C) area {basin_area(grid, LABEL_PREDATOR_ONLY)!r}, "
        f"undecided {grid.undecided_fraction:.4f}"
    )
    return 0


def cmd_homoclinic(args, params, out: Path) -> int:
    p = _nondim_of(params)
    if not args.bracket:
        raise ValueError("homoclinic needs --bracket C_lo,C_hi")
    lo, hi = (float(x) for x in args.bracket.split(","))
    c_hom = solve_homoclinic(p.M, p.B, p.S, p.Q, bracket=(lo, hi), xtol=args.tol)
    from .manifolds import homoclinic_gap

    residual = abs(homoclinic_gap(p.replace(C=c_hom)))
    _write_csv(
        out / "homoclinic.csv",
        "homoclinic",
        p,
        ["M", "B", "S", "Q", "C_hom", "gap_residual"],
        [(p.M, p.B, p.S, p.Q, float(c_hom), float(residual))],
    )
    print(f"homoclinic connection at C = {c_hom!r} (gap residual {residual:.3e})")
    return 0


def cmd_scan_b(args, params, out: Path) -> int:
    if not isinstance(params, DimParams):
        raise ValueError("scan-b needs dimensional parameters (r,K,m,q,s,n,b,c)")
    if args.b_values:
        b_values = [float(x) for x in args.b_values.split(",")]
    elif args.b_range:
        lo, hi, n = args.b_range.split(",")
        b_values = list(np.linspace(float(lo), float(hi), int(n)))
    else:
        raise ValueError("scan-b needs --b-values or --b-range")
    nx, ny = _resolution(args)
    window = _window(args, params)
    res = scan_b(params, b_values, window=window, nx=nx, ny=ny, t_max=args.tmax, tol=args.tol)
    strong = res["strong-allee"][0]
    rows = [
        (r.b, r.area_p2, strong.area_p2, r.area_0c, r.undecided)
        for r in res["multiple-allee"]
    ]
    _write_csv(
        out / "scan_b.csv",
        "scan-b",
        params,
        ["b", "area_p2_multiple", "area_p2_strong", "area_0c_multiple", "undecided_multiple"],
        rows,
        extra=[f"window={window!r}", f"resolution={nx}x{ny}"],
    )
    for r in res["multiple-allee"]:
        print(f"b={r.b:8.3f}  multiple-allee basin {r.area_p2:12.3f}  strong-allee {strong.area_p2:12.3f}")
    return 0


COMMANDS = {
    "equilibria": cmd_equilibria,
    "simulate": cmd_simulate,
    "portrait": cmd_portrait,
    "diagram": cmd_diagram,
    "basin": cmd_basin,
    "homoclinic": cmd_homoclinic,
    "scan-b": cmd_scan_b,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mht-allee",
        description="Predator-prey dynamics with multiple Allee effects: "
        "equilibria, bifurcation curves, manifolds and basins.",
    )
    ap.add_argument("--version", action="version", version=f"mht-allee {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key=value parameter file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--param", action="append", default=[], metavar="KEY=VAL")
        sp.add_argument("--window", help="u0,u1,v0,v1")
        sp.add_argument("--res", help="NX,NY (>= 16 each)")
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--tmax", type=float, default=None)
        if name == "simulate":
            sp.add_argument("--start", help="u0,v0 initial state")
        if name == "portrait":
            sp.add_argument("--with-cycle", action="store_true")
        if name == "diagram":
            sp.add_argument("--axes", default="QC", help="QC or BC")
            sp.add_argument("--a1-range", default="0.1,1.0")
            sp.add_argument("--c-range", default="0.01,1.0")
        if name == "homoclinic":
            sp.add_argument("--bracket", help="C_lo,C_hi")
        if name == "scan-b":
            sp.add_argument("--b-values", help="comma separated b values")
            sp.add_argument("--b-range", help="lo,hi,n")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        kv: dict[str, str] = {}
        if args.config:
            kv.update(_parse_config(args.config))
        for item in args.param:
            if "=" not in item:
                raise ValueError(f"--param must be KEY=VAL, got {item!r}")
            key, val = item.split("=", 1)
            kv[key.strip()] = val.strip()
        # non-param config keys feed the standard flags; explicit flags win
        for flag in ("window", "res", "out"):
            if flag in kv and getattr(args, flag, None) in (None, "."):
                setattr(args, flag, kv.pop(flag))
            else:
                kv.pop(flag, None)
        for flag, default in (("tol", 1e-8), ("tmax", 1e4)):
            if getattr(args, flag) is None:
                setattr(args, flag, float(kv.pop(flag, default)))
            else:
                kv.pop(flag, None)
        params = _build_params(kv)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, params, out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
