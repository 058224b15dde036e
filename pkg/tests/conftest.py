"""Shared parameter sets and sampling helpers for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

from mht_allee import DimParams, NondimParams

# Caption-pinned parameter sets used across the suite.
GLOBAL_EXTINCTION = dict(M=0.05, B=0.05, C=0.5, S=0.175, Q=0.8)       # no interior points
BISTABLE = dict(M=0.07, B=0.0645, C=0.32, S=0.15, Q=0.736)            # stable coexistence
BISTABLE_UNSTABLE = dict(M=0.07, B=0.0645, C=0.32, S=0.05, Q=0.736)   # repelling coexistence
CUSP_SET = dict(M=0.05, B=0.05, C=0.58951256, S=0.125, Q=0.60821818)  # doubly degenerate
SLICE = dict(M=0.05, B=0.1, S=0.071080895, Q=0.75)                    # 1-parameter C-slice
DIM_TEMPLATE = dict(r=14.0, K=150.0, m=15.0, q=1.08, s=1.25, n=0.05, b=7.5, c=0.75)

# Solved landmarks of the C-slice, regenerated by tests that need precision.
SLICE_C_FOLD = 0.3337209826530216
SLICE_C_HOPF = 0.31558087533081114
SLICE_C_HOM_APPROX = 0.306762       # bisection result, reproduced by tests


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_params(rng, n, m_range=(0.05, 0.95), rest_range=(0.05, 5.0)):
    """Admissible parameter samples with moderate magnitudes."""
    lo, hi = rest_range
    out = []
    for _ in range(n):
        out.append(
            NondimParams(
                M=float(rng.uniform(*m_range)),
                B=float(np.exp(rng.uniform(np.log(lo), np.log(hi)))),
                C=float(np.exp(rng.uniform(np.log(lo), np.log(hi)))),
                S=float(np.exp(rng.uniform(np.log(lo), np.log(hi)))),
                Q=float(np.exp(rng.uniform(np.log(lo), np.log(hi)))),
            )
        )
    return out


def slice_params(C: float) -> NondimParams:
    return NondimParams(M=SLICE["M"], B=SLICE["B"], C=C, S=SLICE["S"], Q=SLICE["Q"])


def dim_template(**overrides) -> DimParams:
    vals = dict(DIM_TEMPLATE)
    vals.update(overrides)
    return DimParams(**vals)
