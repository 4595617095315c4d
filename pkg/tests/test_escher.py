import math

import numpy as np
import pytest

from escherblocks.domains import FundamentalDomain, edge_pairing, verify_fundamental_domain
from escherblocks.escher import (CrossingError, DeformationSpec, InterpolationField,
                                 PathError, PLPath, approx_curve, check_noncrossing,
                                 deformation_equals_domain, escher_deform, eval_path,
                                 gamma_three_point, interpolate_boundary, paths_cross,
                                 polylines_cross, random_spec, sup_distance_to_curve,
                                 versatile_construction)
from escherblocks.geom import ring_hausdorff
from escherblocks.wallpaper import make_group

SQ3 = math.sqrt(3)

P4_SQUARE = np.array([(0.0, 0.0), (0.0, -1.0), (1.0, -1.0), (1.0, 0.0)])
KITE_P6 = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, -SQ3 / 3), (0.5, -SQ3 / 2)])


def example5_setup():
    """The p4 square with the square-corner / outside intermediates."""
    G = make_group("p4")
    F = FundamentalDomain(P4_SQUARE, G)
    pairing = edge_pairing(F)
    dom = pairing.domain
    spec_entries = {}
    for r in pairing.representatives:
        a, b = dom.edge(r)
        key = {tuple(np.round(a, 6)), tuple(np.round(b, 6))}
        if key == {(0.0, 0.0), (0.0, -1.0)}:
            spec_entries[r] = (1.0, -1.0)
        elif key == {(0.0, -1.0), (1.0, -1.0)}:
            spec_entries[r] = (0.0, -2.0)
        else:
            raise AssertionError(f"unexpected representative edge {key}")
    return G, F, pairing, DeformationSpec.from_intermediates(spec_entries)


class TestEvalPath:
    def test_segment_midpoint(self):
        assert np.allclose(eval_path(PLPath([(0, 0), (2, 0)]), 0.5), (1, 0))

    def test_three_point_half(self):
        assert np.allclose(eval_path(PLPath([(0, 0), (1, 1), (2, 0)]), 0.5), (1, 1))

    def test_three_point_quarter(self):
        assert np.allclose(eval_path(PLPath([(0, 0), (1, 1), (2, 0)]), 0.25), (0.5, 0.5))

    def test_four_point_parameters(self):
        p = PLPath([(0, 0), (1, 0), (1, 1), (0, 1)])
        assert np.allclose(p.eval(0.25), (1, 0))
        assert np.allclose(p.eval(0.5), (1, 1))
        assert np.allclose(p.eval(1.0), (0, 1))

    def test_out_of_range(self):
        with pytest.raises(PathError):
            eval_path(PLPath([(0, 0), (1, 0)]), 1.5)

    def test_degenerate_points_rejected(self):
        with pytest.raises(PathError):
            PLPath([(0, 0), (0, 0), (1, 0)])


class TestPathsCross:
    def test_proper_crossing(self):
        assert paths_cross(PLPath([(0, 0), (1, 1), (2, 0)]),
                           PLPath([(0, 1), (1, 0), (2, 1)])) is True

    def test_disjoint_translate(self):
        a = PLPath([(0, 0), (1, 1), (2, 0)])
        b = PLPath(a.points + (10.0, 0.0))
        assert paths_cross(a, b) is False

    def test_touch_at_apex_no_side_change(self):
        assert paths_cross(PLPath([(0, 0), (1, 1), (2, 0)]),
                           PLPath([(0, 2), (1, 1), (2, 2)])) is False

    def test_example5_shared_segment_touches(self):
        # the paths of the square-corner deformation share a whole segment
        a = PLPath([(0, 0), (1, -1), (0, -1)])
        b = PLPath([(1, -1), (0, 0), (1, 0)])
        assert paths_cross(a, b) is False

    def test_crossing_through_apex(self):
        a = PLPath([(0, 0), (1, 1), (2, 0)])
        b = PLPath([(1, 0), (0.5, 0.5), (-5, 0)])  # crosses a's first leg at b's apex
        assert paths_cross(a, b) is True

    def test_symmetry_random(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            a = PLPath(rng.uniform(-1, 1, size=(3, 2)))
            b = PLPath(rng.uniform(-1, 1, size=(3, 2)))
            assert paths_cross(a, b) == paths_cross(b, a)

    def test_agrees_with_segment_oracle(self):
        # brute force oracle: proper transversal intersection of interiors
        def oracle(a, b):
            import itertools
            def segs(p):
                return [(p[i], p[i + 1]) for i in range(2)]
            for (p, q), (r, s) in itertools.product(segs(a), segs(b)):
                d1, d2 = q - p, s - r
                den = d1[0] * d2[1] - d1[1] * d2[0]
                if abs(den) < 1e-12:
                    continue
                w = r - p
                t = (w[0] * d2[1] - w[1] * d2[0]) / den
                u = (w[0] * d1[1] - w[1] * d1[0]) / den
                if 1e-7 < t < 1 - 1e-7 and 1e-7 < u < 1 - 1e-7:
                    x = p + t * d1
                    ends = [a[0], a[-1], b[0], b[-1]]
                    if all(np.linalg.norm(x - e) > 1e-7 for e in ends):
                        return True
            return False

        rng = np.random.default_rng(42)
        disagreements = 0
        for _ in range(1000):
            pa = rng.uniform(-1, 1, size=(3, 2))
            pb = rng.uniform(-1, 1, size=(3, 2))
            got = paths_cross(PLPath(pa), PLPath(pb))
            want = oracle(pa, pb)
            if got != want:
                disagreements += 1
        assert disagreements == 0


class TestPolylinesCross:
    def test_transversal(self):
        a = PLPath([(0, 0), (1, 0.2), (2, 0), (3, 0.2)])
        b = PLPath([(0.5, -1), (1.5, 1)])
        assert polylines_cross(a, b) is True

    def test_shared_endpoint_only(self):
        a = PLPath([(0, 0), (1, 1), (2, 0)])
        b = PLPath([(2, 0), (3, 1), (4, 0)])
        assert polylines_cross(a, b) is False

    def test_slide_and_exit_same_side(self):
        a = PLPath([(0, 0), (4, 0)])
        b = PLPath([(1, 1), (2, 0), (3, 0), (3.5, 1)])
        assert polylines_cross(a, b) is False

    def test_slide_and_exit_other_side(self):
        a = PLPath([(0, 0), (4, 0)])
        b = PLPath([(1, 1), (2, 0), (3, 0), (3.5, -1)])
        assert polylines_cross(a, b) is True


class TestEscherDeform:
    def test_example5_domain(self):
        G, F, pairing, spec = example5_setup()
        Fp = escher_deform(F, pairing, spec)
        assert Fp.area == pytest.approx(1.0, abs=1e-9)
        want = {(0.0, 0.0), (1.0, -1.0), (0.0, -1.0), (0.0, -2.0), (1.0, 0.0), (1.0, 1.0)}
        got = {tuple(np.round(v, 9)) for v in Fp.vertices}
        assert want <= got
        rep = verify_fundamental_domain(G, Fp, samples=4000, seed=2)
        assert rep.passed

    def test_midpoints_change_nothing(self):
        G = make_group("p1")
        F = FundamentalDomain(np.array([(0, 0), (1, 0), (1, 1), (0, 1)]), G)
        pairing = edge_pairing(F)
        spec = DeformationSpec.from_intermediates(
            {r: (np.add(*pairing.domain.edge(r)) / 2.0) for r in pairing.representatives})
        Fp = escher_deform(F, pairing, spec)
        assert deformation_equals_domain(F, Fp)
        assert Fp.area == pytest.approx(F.area, abs=1e-12)

    def test_tall_bulge_is_still_valid(self):
        # a single tall bulge nests between the neighbouring copies: legal
        G = make_group("p1")
        F = FundamentalDomain(np.array([(0, 0), (1, 0), (1, 1), (0, 1)]), G)
        pairing = edge_pairing(F)
        reps = pairing.representatives
        entries = {reps[0]: (0.5, 1.5), reps[1]: (np.add(*pairing.domain.edge(reps[1])) / 2.0)}
        Fp = escher_deform(F, pairing, DeformationSpec.from_intermediates(entries))
        assert verify_fundamental_domain(G, Fp, samples=4000, seed=9).passed

    def test_crossing_detected(self):
        # bulges on both representatives run across each other's images
        G = make_group("p1")
        F = FundamentalDomain(np.array([(0, 0), (1, 0), (1, 1), (0, 1)]), G)
        pairing = edge_pairing(F)
        entries = {0: (0.5, 1.5), 1: (1.5, 0.5)}
        with pytest.raises(CrossingError) as err:
            escher_deform(F, pairing, DeformationSpec.from_intermediates(entries))
        assert err.value.pair is not None
        assert err.value.location is not None

    def test_endpoint_mismatch(self):
        G = make_group("p1")
        F = FundamentalDomain(np.array([(0, 0), (1, 0), (1, 1), (0, 1)]), G)
        pairing = edge_pairing(F)
        reps = pairing.representatives
        bad = {reps[0]: PLPath([(5, 5), (6, 6), (7, 7)]),
               reps[1]: (np.add(*pairing.domain.edge(reps[1])) / 2.0)}
        with pytest.raises(PathError):
            escher_deform(F, pairing, DeformationSpec(bad))

    def test_area_invariance_random(self):
        rng = np.random.default_rng(4)
        for kind in ("p1", "pg", "p3", "p4", "p6"):
            G = make_group(kind)
            from escherblocks.domains import dirichlet_domain
            x = rng.uniform(0.1, 0.4, size=2)
            if not G.is_general_position(x):
                continue
            F = dirichlet_domain(G, x)
            pairing = edge_pairing(F)
            for _ in range(3):
                spec = random_spec(pairing, rng)
                Fp = escher_deform(F, pairing, spec)
                assert abs(Fp.area - F.area) <= 1e-6

    def test_escher_closure_verifies(self):
        rng = np.random.default_rng(8)
        G = make_group("p6")
        F = FundamentalDomain(KITE_P6, G)
        pairing = edge_pairing(F)
        spec = random_spec(pairing, rng)
        Fp = escher_deform(F, pairing, spec)
        assert verify_fundamental_domain(G, Fp, samples=10_000, seed=5).passed


class TestInterpolation:
    def test_z_ends(self):
        G, F, pairing, spec = example5_setup()
        field = InterpolationField.build(pairing, spec)
        r0 = interpolate_boundary(field, 0.0)
        assert ring_hausdorff(r0, pairing.domain.vertices) < 1e-9
        r1 = interpolate_boundary(field, 1.0)
        Fp = escher_deform(F, pairing, spec)
        assert ring_hausdorff(r1, Fp.vertices) < 1e-9

    def test_mid_slice_points(self):
        v1, p, v2 = np.array([(0.0, 0.0), (2.0, 2.0), (1.0, 0.0)])
        G = make_group("p1")
        F = FundamentalDomain(np.array([(0, 0), (1, 0), (1, 1), (0, 1)]), G)
        pairing = edge_pairing(F)
        field = InterpolationField.build(
            pairing, DeformationSpec.from_intermediates(
                {r: (np.add(*pairing.domain.edge(r)) / 2.0) for r in pairing.representatives}))
        # direct check of the slice-path formula on a bare edge
        pts = field.edge_slice_points(0, 0.5)
        a, b = pairing.domain.edge(0)
        mid = (a + b) / 2
        assert np.allclose(pts[1], a + 0.5 * (mid - a))

    def test_gamma_branches(self):
        v1, p, v2 = np.array([0.0, 0.0]), np.array([1.0, 1.0]), np.array([2.0, 0.0])
        z = 0.5
        # ends of the middle branch meet the outer branches
        assert np.allclose(gamma_three_point(v1, p, v2, z, z / 2), v1 + z * (p - v1))
        assert np.allclose(gamma_three_point(v1, p, v2, z, 1 - z / 2), v2 + z * (p - v2))
        assert np.allclose(gamma_three_point(v1, p, v2, z, 0.0), v1)
        assert np.allclose(gamma_three_point(v1, p, v2, z, 1.0), v2)
        assert np.allclose(gamma_three_point(v1, p, v2, 0.0, 0.25), (0.5, 0.0))
        assert np.allclose(gamma_three_point(v1, p, v2, 1.0, 0.5), p)

    def test_interior_slices_verify(self):
        G, F, pairing, spec = example5_setup()
        field = InterpolationField.build(pairing, spec)
        for z in (0.25, 0.5, 0.75):
            ring = interpolate_boundary(field, z)
            rep = verify_fundamental_domain(G, ring, samples=4000, seed=int(z * 100))
            assert rep.passed, (z, rep)

    def test_out_of_range(self):
        G, F, pairing, spec = example5_setup()
        field = InterpolationField.build(pairing, spec)
        with pytest.raises(PathError):
            interpolate_boundary(field, 1.5)


class TestApproxCurve:
    @staticmethod
    def sine(t):
        return np.array([t, math.sin(2 * math.pi * t) / math.pi])

    def test_stage_one(self):
        f = lambda t: np.array([t, math.sin(2 * math.pi * t)])
        p = approx_curve(f, N=1, a=1, n=1)
        assert np.allclose(p.points, [(0, 0), (0.5, 0), (1, 0)], atol=1e-12)

    def test_stage_two_full_scale(self):
        p = approx_curve(self.sine, N=2, a=1, n=2)
        want = [self.sine(i / 4) for i in range(5)]
        assert np.allclose(p.points, want, atol=1e-12)

    def test_endpoint_mismatch(self):
        with pytest.raises(PathError):
            approx_curve(lambda t: np.array([t, 1.0 + t]), N=2, a=1, n=1)

    def test_uniform_convergence(self):
        # resolutions 2^n = 2, 4, ..., 64: the fully-scaled stage paths f^n_n
        sups = []
        for n in (1, 2, 3, 4, 5, 6):
            path = approx_curve(self.sine, N=n, a=1, n=n)
            sups.append(sup_distance_to_curve(path, self.sine, samples=1000))
        assert all(sups[i + 1] <= sups[i] + 1e-12 for i in range(len(sups) - 1))
        assert sups[-1] < 0.02

    def test_depth_guard(self):
        with pytest.raises(PathError):
            approx_curve(self.sine, N=64, a=1, n=64)


class TestVersatile:
    def test_p4_limit_recovers_canonical_paths(self):
        G, F, pairing, spec = versatile_construction("p4-limit")
        paths = check_noncrossing(pairing, spec)
        Fp = escher_deform(F, pairing, spec)
        # the deformed tile is the 1x2 box with a whisker at (2,0)
        box = [tuple(np.round(v, 9)) for v in Fp.vertices]
        for corner in [(0.0, -1.0), (1.0, -1.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0)]:
            assert corner in box
        assert Fp.area == pytest.approx(2.0, abs=1e-9)

    def test_p3_limit_recovers_hexagon(self):
        G, F, pairing, spec = versatile_construction("p3-limit")
        Fp = escher_deform(F, pairing, spec)
        assert Fp.area == pytest.approx(SQ3 / 2, abs=1e-9)
        # the canonical block's top hexagon (shifted toward the lower triangle)
        hexagon = {(0.0, 0.0), (0.5, round(SQ3 / 6, 9)), (1.0, 0.0),
                   (1.0, round(-SQ3 / 3, 9)), (0.5, round(-SQ3 / 2, 9)), (0.0, round(-SQ3 / 3, 9))}
        got = {(round(v[0], 9), round(v[1], 9)) for v in Fp.vertices}
        assert hexagon <= got

    def test_straight_segment_is_identity(self):
        G, F, pairing, spec = versatile_construction("generic", alpha=math.pi / 3)
        Fp = escher_deform(F, pairing, spec)
        assert deformation_equals_domain(F, Fp)

    def test_versatile_domains_tile_for_p1(self):
        for kind in ("p4-limit", "p3-limit"):
            G, F, pairing, spec = versatile_construction(kind)
            Fp = escher_deform(F, pairing, spec)
            assert verify_fundamental_domain(G, Fp, samples=4000, seed=1).passed

    def test_segment_region_violation(self):
        from escherblocks.escher import versatile_boundary
        with pytest.raises(PathError):
            versatile_boundary(np.array([(0.0, 0.0), (3.0, -3.0)]), "p4-limit")
