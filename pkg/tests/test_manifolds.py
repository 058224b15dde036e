"""Saddle manifold tracing and homoclinic shooting tests."""
from __future__ import annotations

import math

import numpy as np
import pytest

from mht_allee import (
    NondimParams,
    SectionMiss,
    field_nondim,
    find_limit_cycle,
    homoclinic_gap,
    positive_equilibria,
    saddle_branches,
    solve_homoclinic,
)
from mht_allee.basins import points_in_polygon, separatrix_polygon
from mht_allee.dynamics import attractor_ball_event, integrate

from conftest import BISTABLE, GLOBAL_EXTINCTION, SLICE, SLICE_C_HOPF, slice_params


def _hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    def one_sided(pts, poly):
        p0 = poly[:-1]
        seg = poly[1:] - p0
        seg_len2 = np.maximum((seg**2).sum(axis=1), 1e-300)
        worst = 0.0
        for q in pts[:: max(1, len(pts) // 400)]:
            t = np.clip(((q - p0) * seg).sum(axis=1) / seg_len2, 0.0, 1.0)
            proj = p0 + t[:, None] * seg
            worst = max(worst, np.sqrt(((q - proj) ** 2).sum(axis=1)).min())
        return worst

    return max(one_sided(a, b), one_sided(b, a))


class TestSaddleBranches:
    def test_four_branches_with_expected_termini(self):
        branches = saddle_branches(slice_params(0.20))
        assert len(branches) == 4
        by_key = {(b.stability, b.direction): b for b in branches}
        assert by_key[("unstable", "up-right")].terminus_point == "interior-upper"
        assert by_key[("unstable", "down-left")].terminus_point == "predator-only"
        assert by_key[("unstable", "down-left")].terminus == "reached-attractor"
        assert by_key[("stable", "up-right")].terminus == "reached-window-edge"
        assert by_key[("stable", "down-left")].terminus == "reached-boundary-point"
        assert by_key[("stable", "down-left")].terminus_point == "allee-threshold"

    def test_near_connection_branch_lands_on_the_threshold_point(self):
        # just below the connection value the returning stable branch closes
        # onto the prey-threshold point
        branches = saddle_branches(slice_params(0.305))
        up = next(b for b in branches if b.stability == "stable" and b.direction == "up-right")
        assert up.terminus == "reached-boundary-point"
        assert up.terminus_point == "allee-threshold"

    def test_seed_and_tangency(self):
        eps = 1e-6
        branches = saddle_branches(slice_params(0.20), eps=eps)
        for b in branches:
            saddle = np.array([b.saddle.location.u, b.saddle.location.v])
            assert b.polyline.shape[0] > 3
            assert np.allclose(b.polyline[0], saddle)
            offset = b.polyline[1] - saddle
            assert np.linalg.norm(offset) == pytest.approx(eps, rel=1e-6)
            seg = b.polyline[2] - b.polyline[1]
            seg = seg / np.linalg.norm(seg)
            angle = math.degrees(math.acos(min(1.0, abs(float(seg @ b.eigenvector)))))
            assert angle < 5.0, (b.stability, b.direction, angle)

    def test_eps_refinement_is_stable(self):
        p = slice_params(0.20)
        eps = 1e-5
        coarse = saddle_branches(p, eps=eps)
        fine = saddle_branches(p, eps=eps / 2.0)
        for bc, bf in zip(coarse, fine):
            d = _hausdorff(bc.polyline, bf.polyline)
            assert d < 10.0 * eps, (bc.stability, bc.direction, d)

    def test_rejects_missing_saddle(self):
        with pytest.raises(ValueError, match="two interior equilibria"):
            saddle_branches(NondimParams(**GLOBAL_EXTINCTION))


class TestHomoclinicGap:
    def test_sign_change_across_the_connection(self):
        assert homoclinic_gap(slice_params(0.30)) < 0.0
        assert homoclinic_gap(slice_params(0.31)) > 0.0

    def test_zero_at_solved_connection(self):
        c_hom = solve_homoclinic(**SLICE, bracket=(0.2, 0.315))
        assert abs(homoclinic_gap(slice_params(c_hom))) < 1e-6

    def test_precondition_rejection(self):
        with pytest.raises(ValueError):
            homoclinic_gap(NondimParams(**GLOBAL_EXTINCTION))

    def test_miss_reported_with_terminus(self):
        # far below the connection the returning branch leaves the window
        with pytest.raises(SectionMiss) as err:
            homoclinic_gap(slice_params(0.03))
        assert err.value.terminus
        assert err.value.branch == "stable"


class TestSolveHomoclinic:
    def test_connection_value_and_ordering(self):
        c_hom = solve_homoclinic(**SLICE, bracket=(0.2, 0.315), xtol=1e-8)
        assert 0.0 < c_hom < SLICE_C_HOPF
        assert c_hom == pytest.approx(0.306762, abs=5e-5)

    def test_bracket_shrinks_to_tolerance(self):
        a = solve_homoclinic(**SLICE, bracket=(0.25, 0.315), xtol=1e-6)
        b = solve_homoclinic(**SLICE, bracket=(0.28, 0.314), xtol=1e-6)
        assert a == pytest.approx(b, abs=5e-6)

    def test_no_sign_change_is_an_error(self):
        with pytest.raises(ValueError, match="sign"):
            solve_homoclinic(**SLICE, bracket=(0.15, 0.25))

    def test_cycle_period_grows_toward_the_connection(self):
        c_hom = solve_homoclinic(**SLICE, bracket=(0.2, 0.315), xtol=1e-8)
        near = find_limit_cycle(slice_params(c_hom + 1e-4))
        far = find_limit_cycle(slice_params(c_hom + 1e-3))
        assert near is not None and far is not None
        assert near.period > far.period, (near.period, far.period)


class TestSeparatrixProperty:
    def test_sides_of_the_stable_manifold_predict_fates(self, rng):
        """Random starts resolve to the attractor their side of the curve says."""
        p = NondimParams(**BISTABLE)
        polygon = separatrix_polygon(p)
        interior = positive_equilibria(p)
        p2 = interior[1].location
        targets = {
            "coexistence": (p2.u, p2.v),
            "predator-only": (0.0, p.C),
        }
        events = [attractor_ball_event(loc, label=lab) for lab, loc in targets.items()]
        mismatch = []
        n = 100
        pts = np.column_stack(
            [rng.uniform(0.01, 0.99, n), rng.uniform(0.01, 1.3, n)]
        )
        inside = points_in_polygon(pts, polygon)
        for (u0, v0), ins in zip(pts, inside):
            traj = integrate(
                lambda s: field_nondim(p, s), (u0, v0), t_max=1e4, tol=1e-8, events=events
            )
            if traj.termination != "entered-attractor-ball":
                continue
            predicted = "coexistence" if ins else "predator-only"
            if predicted != traj.attractor:
                mismatch.append((u0, v0))
        assert len(mismatch) <= 2, mismatch
        # mismatches, if any, hug the polyline
        for q in mismatch:
            d = np.hypot(polygon[:, 0] - q[0], polygon[:, 1] - q[1]).min()
            assert d < 1e-2, (q, d)
