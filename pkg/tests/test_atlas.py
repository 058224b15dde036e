"""Bifurcation curves, the codimension-two point, and region tags."""
from __future__ import annotations

import math

import numpy as np
import pytest

from mht_allee import (
    NondimParams,
    discriminant,
    jacobian_nondim,
    locate_bt,
    region_classify,
    solve_fold_c,
    solve_heteroclinic_c,
    solve_hopf_c,
    solve_homoclinic,
    sweep_diagram,
    trace_factor,
)

from conftest import CUSP_SET, SLICE, SLICE_C_FOLD, SLICE_C_HOPF, slice_params


class TestFoldSolve:
    def test_pinned_fold_value(self):
        c = solve_fold_c(0.05, 0.05, 0.60821818)
        assert c == pytest.approx(0.58951256, abs=1e-6)

    def test_double_root_at_fold(self):
        c = solve_fold_c(**{k: SLICE[k] for k in ("M", "B", "Q")})
        d = discriminant(NondimParams(M=SLICE["M"], B=SLICE["B"], C=c, S=SLICE["S"], Q=SLICE["Q"]))
        assert d.u1 == d.u2 == d.u3
        assert abs(d.value) < 1e-10

    def test_discriminant_changes_sign_across_fold(self):
        M, B, Q = SLICE["M"], SLICE["B"], SLICE["Q"]
        c = solve_fold_c(M, B, Q)

        def delta(cv):
            T = 1.0 + M - Q * (B + cv)
            return T * T - 4.0 * (1.0 + Q) * (M + B * cv * Q)

        assert delta(c - 1e-4) > 0.0 > delta(c + 1e-4)

    def test_no_root_rejected(self):
        with pytest.raises(ValueError):
            solve_fold_c(0.9, 5.0, 5.0)


class TestHopfSolve:
    def test_slice_value_and_residuals(self):
        roots = solve_hopf_c(**SLICE)
        assert len(roots) == 1
        c_h = roots[0]
        assert c_h == pytest.approx(SLICE_C_HOPF, abs=1e-9)
        p = slice_params(c_h)
        d = discriminant(p)
        J = jacobian_nondim(p, (d.u2, d.u2 + c_h))
        assert abs(J[0, 0] + J[1, 1]) < 1e-8
        assert J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0] > 0.0

    def test_eigenvalues_purely_imaginary(self):
        c_h = solve_hopf_c(**SLICE)[0]
        from mht_allee import positive_equilibria

        upper = positive_equilibria(slice_params(c_h))[1]
        l1, l2 = upper.eigenvalues
        assert abs(l1.real) < 1e-6 and abs(l2.real) < 1e-6
        assert abs(l1.imag) > 1e-3

    def test_transversality(self):
        """The trace crosses zero with nonzero speed in C."""
        c_h = solve_hopf_c(**SLICE)[0]

        def trace_at(cv):
            p = slice_params(cv)
            d = discriminant(p)
            J = jacobian_nondim(p, (d.u2, d.u2 + cv))
            return float(J[0, 0] + J[1, 1])

        h = 1e-5
        slope = (trace_at(c_h + h) - trace_at(c_h - h)) / (2.0 * h)
        assert abs(slope) > 1e-3


class TestBogdanovTakens:
    def test_point_in_the_q_c_plane(self):
        bt = locate_bt({"M": 0.05, "B": 0.1, "S": 0.071080895}, ("Q", "C"), (0.1, 1.0))
        assert bt.residual_delta < 1e-8
        assert bt.residual_trace < 1e-8
        assert bt.l20 > 0.0
        assert abs(bt.l11) > 0.0
        # both degeneracies at the double point itself
        d = discriminant(bt.params)
        J = jacobian_nondim(bt.params, (d.u3, d.u3 + bt.params.C))
        assert abs(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]) < 1e-8
        assert abs(J[0, 0] + J[1, 1]) < 1e-8

    def test_recovers_the_pinned_degenerate_set(self):
        bt = locate_bt({"M": 0.05, "B": 0.05, "S": 0.125}, ("Q", "C"), (0.3, 1.0))
        assert bt.axis1_value == pytest.approx(0.60821818, abs=1e-5)
        assert bt.c_value == pytest.approx(0.58951256, abs=1e-5)

    def test_pinned_set_satisfies_both_residuals(self):
        p = NondimParams(**CUSP_SET)
        d = discriminant(p)
        assert abs(d.value) < 1e-4
        J = jacobian_nondim(p, (d.u3, d.u3 + p.C))
        assert abs(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]) < 1e-4
        assert abs(J[0, 0] + J[1, 1]) < 1e-4


class TestRegionClassification:
    def test_slice_panels_in_order(self):
        c_hom = solve_homoclinic(**SLICE, bracket=(0.2, 0.315), xtol=1e-10)
        samples = [
            (0.10, "i"),
            (0.305, "iii"),
            (c_hom, "iv"),
            (0.5 * (c_hom + SLICE_C_HOPF), "v"),
            (0.5 * (SLICE_C_HOPF + SLICE_C_FOLD), "vi"),
            (SLICE_C_FOLD, "vii"),
            (1.2 * SLICE_C_FOLD, "viii"),
        ]
        for c, expected in samples:
            rc = region_classify(slice_params(c))
            assert rc.panel == expected, (c, rc)

    def test_heteroclinic_moment_is_panel_ii(self):
        c_het = solve_heteroclinic_c(**SLICE, bracket=(0.30, 0.306))
        rc = region_classify(slice_params(c_het))
        assert rc.panel == "ii"
        assert rc.p2_stability == "attractor"

    def test_region_contents(self):
        rc_v = region_classify(slice_params(0.31))
        assert (rc_v.n_positive, rc_v.p2_stability, rc_v.cycle) == (2, "attractor", "present")
        rc_vi = region_classify(slice_params(0.32))
        assert (rc_vi.n_positive, rc_vi.p2_stability, rc_vi.cycle) == (2, "repeller", "absent")
        rc_viii = region_classify(slice_params(0.4))
        assert rc_viii.n_positive == 0


class TestSweep:
    @pytest.fixture(scope="class")
    def qc_diagram(self):
        return sweep_diagram(
            {"M": 0.05, "B": 0.1, "S": 0.071080895},
            (("Q", 0.25, 1.0), ("C", 0.01, 1.8)),
            resolution=16,
        )

    def test_rejects_low_resolution(self):
        with pytest.raises(ValueError, match="resolution"):
            sweep_diagram(
                {"M": 0.05, "B": 0.1, "S": 0.071080895},
                (("Q", 0.3, 1.0), ("C", 0.01, 1.5)),
                resolution=8,
            )

    def test_three_curves_and_ordering(self, qc_diagram):
        assert len(qc_diagram.curves["saddle-node"]) == 16
        assert len(qc_diagram.curves["hopf"]) >= 14
        assert len(qc_diagram.curves["homoclinic"]) >= 14
        assert qc_diagram.ordering_ok

    def test_pointwise_residuals(self, qc_diagram):
        for _, _, res in qc_diagram.curves["saddle-node"]:
            assert res < 1e-8
        for _, _, res in qc_diagram.curves["hopf"]:
            assert res < 1e-6
        for _, _, res in qc_diagram.curves["homoclinic"]:
            assert res < 1e-5

    def test_curves_terminate_near_the_bt_point(self, qc_diagram):
        assert "bogdanov-takens" in qc_diagram.points
        qbt, cbt = qc_diagram.points["bogdanov-takens"]
        cell_q = (1.0 - 0.25) / 15
        cell_c = (1.8 - 0.01) / 15
        for label in ("hopf", "homoclinic"):
            pts = qc_diagram.curves[label]
            end = min(pts, key=lambda r: r[0])  # terminal end toward shrinking Q
            assert abs(end[0] - qbt) < 2 * cell_q, (label, end)
            assert abs(end[1] - cbt) < 2 * cell_c, (label, end)

    def test_vertical_slice_reproduces_the_panel_order(self, qc_diagram):
        """Any column crosses the panels in the canonical order as C rises."""
        col_q = min(
            (pt[0] for pt in qc_diagram.curves["homoclinic"]), key=lambda q: abs(q - 0.75)
        )
        col = {
            label: next(c for q, c, _ in qc_diagram.curves[label] if q == col_q)
            for label in ("saddle-node", "hopf", "homoclinic")
        }
        sequence = []
        for c in (
            0.5 * col["homoclinic"],
            0.5 * (col["homoclinic"] + col["hopf"]),
            0.5 * (col["hopf"] + col["saddle-node"]),
            1.1 * col["saddle-node"],
        ):
            p = NondimParams(M=0.05, B=0.1, C=c, S=0.071080895, Q=col_q)
            sequence.append(region_classify(p).panel)
        assert sequence == ["i", "v", "vi", "viii"]

    def test_region_labels_stable_under_refinement(self):
        fixed = {"M": 0.05, "B": 0.1, "S": 0.071080895}
        coarse = sweep_diagram(
            fixed, (("Q", 0.5, 1.0), ("C", 0.01, 0.8)), resolution=16, with_bt=False
        )
        fine = sweep_diagram(
            fixed, (("Q", 0.5, 1.0), ("C", 0.01, 0.8)), resolution=32, with_bt=False
        )
        assert {rc.panel for _, rc in coarse.regions} == {rc.panel for _, rc in fine.regions}

    def test_bc_plane_has_the_same_curve_structure(self):
        diag = sweep_diagram(
            {"M": 0.05, "S": 0.071080895, "Q": 0.608},
            (("B", 0.02, 0.6), ("C", 0.005, 0.8)),
            resolution=16,
        )
        assert len(diag.curves["saddle-node"]) == 16
        assert len(diag.curves["hopf"]) >= 12
        assert len(diag.curves["homoclinic"]) >= 10
        assert diag.ordering_ok
