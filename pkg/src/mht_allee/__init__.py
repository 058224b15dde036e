# src/mht_allee/__init__.py
"""Predator-prey dynamics with multiple Allee effects and alternative predator food.

The package locates every equilibrium of the model in closed form,
classifies local stability, traces invariant manifolds and homoclinic
connections, assembles two-parameter bifurcation diagrams, and maps
basins of attraction on grids, in both the dimensional and the rescaled
coordinate frames.
"""
from .model import (
    LOGISTIC,
    MULTIPLE_ALLEE,
    STRONG_ALLEE,
    DimParams,
    NondimParams,
    State,
    depensation_interval,
    field_dim,
    field_nondim,
    jacobian_dim,
    jacobian_nondim,
    map_state,
    nondimensionalize,
    per_capita_growth,
    prey_nullcline,
)
from .equilibria import (
    Discriminant,
    Equilibrium,
    boundary_equilibria,
    classify,
    cusp_coefficients,
    discriminant,
    eigenvalues,
    is_attractor,
    is_repeller,
    positive_equilibria,
    sotomayor_quantities,
    trace_factor,
)
from .dynamics import (
    Event,
    InvariantRegionReport,
    LimitCycle,
    Trajectory,
    attractor_ball_event,
    find_limit_cycle,
    integrate,
    verify_invariant_region,
    window_exit_event,
)
from .manifolds import (
    ManifoldBranch,
    SectionMiss,
    homoclinic_gap,
    saddle_branches,
    solve_homoclinic,
)
from .atlas import (
    BifurcationDiagram,
    BTPoint,
    RegionClass,
    locate_bt,
    region_classify,
    solve_fold_c,
    solve_heteroclinic_c,
    solve_hopf_c,
    sweep_diagram,
)
from .basins import (
    BasinGrid,
    BasinReport,
    basin_area,
    compute_basin,
    scan_b,
)

__version__ = "0.1.0"

__all__ = [
    "LOGISTIC",
    "MULTIPLE_ALLEE",
    "STRONG_ALLEE",
    "DimParams",
    "NondimParams",
    "State",
    "depensation_interval",
    "field_dim",
    "field_nondim",
    "jacobian_dim",
    "jacobian_nondim",
    "map_state",
    "nondimensionalize",
    "per_capita_growth",
    "prey_nullcline",
    "Discriminant",
    "Equilibrium",
    "boundary_equilibria",
    "classify",
    "cusp_coefficients",
    "discriminant",
    "eigenvalues",
    "is_attractor",
    "is_repeller",
    "positive_equilibria",
    "sotomayor_quantities",
    "trace_factor",
    "Event",
    "InvariantRegionReport",
    "LimitCycle",
    "Trajectory",
    "attractor_ball_event",
    "find_limit_cycle",
    "integrate",
    "verify_invariant_region",
    "window_exit_event",
    "ManifoldBranch",
    "SectionMiss",
    "homoclinic_gap",
    "saddle_branches",
    "solve_homoclinic",
    "BifurcationDiagram",
    "BTPoint",
    "RegionClass",
    "locate_bt",
    "region_classify",
    "solve_fold_c",
    "solve_heteroclinic_c",
    "solve_hopf_c",
    "sweep_diagram",
    "BasinGrid",
    "BasinReport",
    "basin_area",
    "compute_basin",
    "scan_b",
    "__version__",
]
