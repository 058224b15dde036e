"""Model-layer tests: rescaling, vector fields, Jacobian, growth laws."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mht_allee import (
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
)
from mht_allee.dynamics import integrate

from conftest import dim_template, random_params


class TestRescaling:
    def test_caption_parameter_set(self):
        p = nondimensionalize(dim_template())
        assert p.M == pytest.approx(0.1, abs=1e-15)
        assert p.B == pytest.approx(0.05, abs=1e-15)
        assert p.C == pytest.approx(0.1, abs=1e-15)
        assert p.S == pytest.approx(1.25 / 14.0, rel=1e-15)
        assert p.Q == pytest.approx(1.08 * 0.05 * 150.0 / 14.0, rel=1e-15)

    def test_unit_carrying_capacity_is_identity_on_ratios(self):
        p = nondimensionalize(
            DimParams(r=1, K=1, m=0.5, q=1, s=1, n=1, b=1, c=1)
        )
        assert (p.M, p.B, p.C, p.S, p.Q) == (0.5, 1.0, 1.0, 1.0, 1.0)

    def test_threshold_above_capacity_rejected(self):
        with pytest.raises(ValueError, match="carrying capacity"):
            nondimensionalize(dim_template(m=151.0))
        with pytest.raises(ValueError):
            DimParams(**{**dim_template().__dict__, "m": 150.0})

    def test_map_state_scalings(self):
        tpl = dim_template()
        s = map_state(tpl, State(1.0, 1.0))
        assert (s.u, s.v) == (150.0, 7.5)
        axis = map_state(tpl, State(0.0, nondimensionalize(tpl).C))
        assert axis.u == 0.0
        assert axis.v == pytest.approx(tpl.c, rel=1e-14)

    def test_map_state_round_trip(self):
        tpl = dim_template()
        s0 = State(0.37, 0.82)
        back = map_state(tpl, map_state(tpl, s0))
        assert back.u == pytest.approx(s0.u, rel=1e-14)
        assert back.v == pytest.approx(s0.v, rel=1e-14)

    def test_equilibrium_correspondence(self):
        """Fixed points of the rescaled system map to fixed points of the model."""
        from mht_allee import boundary_equilibria, positive_equilibria

        tpl = dim_template()
        p = nondimensionalize(tpl)
        for e in boundary_equilibria(p) + positive_equilibria(p):
            mapped = map_state(tpl, e.location)
            dx, dy = field_dim(tpl, mapped)
            scale = 1.0 + math.hypot(mapped.u, mapped.v)
            assert math.hypot(dx, dy) < 1e-8 * scale, (e.kind, dx, dy)


class TestFields:
    def test_boundary_fixed_points_are_exact_zeros(self, rng):
        # factored evaluation makes these zeros exact in floating point
        for p in random_params(rng, 50):
            for pt in ((0.0, 0.0), (p.M, 0.0), (1.0, 0.0), (0.0, p.C)):
                assert field_nondim(p, pt) == (0.0, 0.0), pt

    def test_axes_have_no_other_zeros(self, rng):
        p = random_params(rng, 1)[0]
        us = np.linspace(1e-3, 3.0, 500)
        for u in us:
            if min(abs(u - r) for r in (0.0, p.M, 1.0)) > 1e-2:
                assert abs(field_nondim(p, (u, 0.0))[0]) > 0.0
        vs = np.linspace(1e-3, 3.0, 500)
        for v in vs:
            if abs(v - p.C) > 1e-2:
                assert abs(field_nondim(p, (0.0, v))[1]) > 0.0

    def test_dimensional_fixed_points(self):
        for variant in ("multiple-allee", "strong-allee"):
            tpl = dim_template(variant=variant)
            assert field_dim(tpl, (0.0, tpl.c)) == (0.0, 0.0)
            dx, dy = field_dim(tpl, (tpl.K, 0.0))
            assert dx == 0.0 and dy == 0.0

    def test_sign_pattern_matches_between_frames(self, rng):
        """Orientation-preserving equivalence: rate signs agree frame to frame."""
        tpl = dim_template()
        p = nondimensionalize(tpl)
        xs = rng.uniform(1e-3, 2.0 * tpl.K, 10_000)
        ys = rng.uniform(1e-3, 2.0 * tpl.n * tpl.K, 10_000)
        for x, y in zip(xs, ys):
            dx, dy = field_dim(tpl, (x, y))
            du, dv = field_nondim(p, (x / tpl.K, y / (tpl.n * tpl.K)))
            assert np.sign(dx) == np.sign(du), (x, y)
            assert np.sign(dy) == np.sign(dv), (x, y)


class TestJacobian:
    @staticmethod
    def _fd_jacobian(field, u, v):
        J = np.empty((2, 2))
        for j, (du, dv) in enumerate(((1.0, 0.0), (0.0, 1.0))):
            h = 1e-6 * (1.0 + abs(u if j == 0 else v))
            f_plus = np.array(field((u + h * du, v + h * dv)))
            f_minus = np.array(field((u - h * du, v - h * dv)))
            J[:, j] = (f_plus - f_minus) / (2.0 * h)
        return J

    def test_matches_finite_differences(self, rng):
        worst = 0.0
        for p in random_params(rng, 250):
            for _ in range(4):
                u, v = rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)
                J = jacobian_nondim(p, (u, v))
                Jfd = self._fd_jacobian(lambda s: field_nondim(p, s), u, v)
                scale = np.abs(J).max()
                err = (np.abs(J - Jfd) / np.maximum(np.abs(J), scale)).max()
                worst = max(worst, err)
        assert worst < 1e-6, f"worst componentwise relative error {worst:.3e}"

    def test_closed_form_corners(self, rng):
        for p in random_params(rng, 30):
            J0 = jacobian_nondim(p, (0.0, 0.0))
            assert J0[0, 0] == pytest.approx(-p.C * p.M, rel=1e-14)
            assert J0[1, 1] == pytest.approx(p.B * p.C * p.S, rel=1e-14)
            assert J0[0, 1] == 0.0 and J0[1, 0] == 0.0
            Jc = jacobian_nondim(p, (0.0, p.C))
            assert Jc[0, 0] == pytest.approx(-p.C * (p.M + p.B * p.Q * p.C), rel=1e-13)
            assert Jc[1, 1] == pytest.approx(-p.B * p.C * p.S, rel=1e-14)
            assert Jc[0, 1] == 0.0

    def test_dimensional_jacobian_matches_fd(self, rng):
        for variant in ("multiple-allee", "strong-allee"):
            tpl = dim_template(variant=variant)
            for _ in range(50):
                x, y = rng.uniform(1.0, 140.0), rng.uniform(0.1, 8.0)
                J = jacobian_dim(tpl, (x, y))
                Jfd = self._fd_jacobian(lambda s: field_dim(tpl, s), x, y)
                scale = np.abs(J).max()
                assert (np.abs(J - Jfd) / np.maximum(np.abs(J), scale)).max() < 1e-5


class TestGrowthLaws:
    def test_zeros_at_threshold_and_capacity(self):
        tpl = dim_template(K=1.0, m=0.1, b=0.15, r=1.0)
        assert per_capita_growth("multiple-allee", tpl, 0.1) == 0.0
        for variant in ("logistic", "strong-allee", "multiple-allee"):
            assert per_capita_growth(variant, tpl, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_pinned_value(self):
        tpl = dim_template(K=1.0, m=0.1, b=0.15, r=1.0)
        assert per_capita_growth("multiple-allee", tpl, 0.5) == pytest.approx(
            0.5 * 0.4 / 0.65, rel=1e-12
        )

    def test_depensation_endpoints(self):
        assert depensation_interval("strong-allee", 0.1, 1.0, 0.1) == (0.1, 0.55)
        lo, hi = depensation_interval("multiple-allee", 1e-12, 1.0, 0.1)
        assert hi == pytest.approx(math.sqrt(0.1), rel=1e-6)

    def test_multiple_never_exceeds_strong(self, rng):
        K, m = 1.0, 0.1
        _, strong_hi = depensation_interval("strong-allee", 1.0, K, m)
        for b in rng.uniform(1e-6, 2.0 * K, 100):
            _, multi_hi = depensation_interval("multiple-allee", float(b), K, m)
            assert multi_hi <= strong_hi + 1e-12

    @given(
        b=st.floats(1e-6, 50.0),
        K=st.floats(0.5, 500.0),
        frac=st.floats(1e-3, 0.999),
    )
    @settings(max_examples=200, deadline=None)
    def test_depensation_ordering_property(self, b, K, frac):
        m = frac * K
        _, multi_hi = depensation_interval("multiple-allee", b, K, m)
        _, strong_hi = depensation_interval("strong-allee", b, K, m)
        assert m < multi_hi <= strong_hi + 1e-9 * K

    def test_maximiser_is_stationary(self, rng):
        """The upper endpoint maximises per-capita growth (derivative oracle)."""
        tpl = dim_template()
        for variant in ("strong-allee", "multiple-allee"):
            _, hi = depensation_interval(variant, tpl.b, tpl.K, tpl.m)
            h = 1e-5 * tpl.K
            g = lambda x: per_capita_growth(variant, tpl, x)
            deriv = (g(hi + h) - g(hi - h)) / (2 * h)
            assert abs(deriv) < 1e-6, (variant, deriv)


class TestOrbitEquivalence:
    @staticmethod
    def _polyline_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
        """Max over points of a of the distance to polyline b (segment-aware)."""

        def one_sided(pts, poly):
            p0 = poly[:-1]
            seg = poly[1:] - p0
            seg_len2 = np.maximum((seg**2).sum(axis=1), 1e-300)
            worst = 0.0
            for q in pts:
                t = np.clip(((q - p0) * seg).sum(axis=1) / seg_len2, 0.0, 1.0)
                proj = p0 + t[:, None] * seg
                d = np.sqrt(((q - proj) ** 2).sum(axis=1)).min()
                worst = max(worst, d)
            return worst

        return max(one_sided(a, b), one_sided(b, a))

    def test_orbits_overlay_after_mapping(self, rng):
        """Rescaled orbits mapped to the model frame match directly integrated ones.

        Both runs stop on the same geometric locus (the image of a small
        ball around the attractor), so the two polylines cover the same
        phase curve end to end.
        """
        from mht_allee.basins import attractors_of
        from mht_allee.dynamics import Event

        compared = 0
        for i in range(10):
            tpl = dim_template(
                b=float(rng.uniform(1.0, 40.0)),
                q=float(rng.uniform(0.5, 2.0)),
                c=float(rng.uniform(0.3, 2.0)),
            )
            p = nondimensionalize(tpl)
            u0, v0 = float(rng.uniform(0.2, 0.9)), float(rng.uniform(0.2, 0.9))
            radius = 1e-3
            nd_events = [
                Event(
                    fn=lambda t, u, v, a=a: math.hypot(u - a[0], v - a[1]) - radius,
                    terminal=True,
                    direction=-1,
                    label=str(lab),
                    kind="custom",
                )
                for lab, a in attractors_of(p)
            ]
            dim_events = [
                Event(
                    fn=lambda t, x, y, a=a: math.hypot(
                        (x / tpl.K) - a[0], (y / (tpl.n * tpl.K)) - a[1]
                    )
                    - radius,
                    terminal=True,
                    direction=-1,
                    label=str(lab),
                    kind="custom",
                )
                for lab, a in attractors_of(p)
            ]
            nd = integrate(
                lambda s: field_nondim(p, s), (u0, v0), t_max=4000.0, tol=1e-11,
                events=nd_events,
            )
            if nd.termination == "max-time":
                continue
            dim = integrate(
                lambda s: field_dim(tpl, s),
                (u0 * tpl.K, v0 * tpl.n * tpl.K),
                t_max=4000.0,
                tol=1e-11,
                events=dim_events,
            )
            if dim.termination == "max-time":
                continue
            compared += 1
            mapped = nd.points * np.array([tpl.K, tpl.n * tpl.K])
            dist = self._polyline_hausdorff(mapped, dim.points)
            assert dist < 1e-3 * tpl.K, f"sample {i}: Hausdorff distance {dist:.3e}"
        assert compared >= 8, f"only {compared}/10 samples reached an attractor"
