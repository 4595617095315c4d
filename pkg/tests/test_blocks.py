import math

import numpy as np
import pytest

from escherblocks.blocks import (Block, ContainmentError, InvalidGrowthError,
                                 MeshTopologyError, TriMesh, apply_growth, audit_mesh,
                                 build_approx_block, build_block, cleanup_closure,
                                 flip_block, iterate_blocks, mesh_section, mirror_block,
                                 points_in_mesh, shrink_top, slice_block, volume)
from escherblocks.domains import FundamentalDomain, edge_pairing, verify_fundamental_domain
from escherblocks.escher import DeformationSpec, interpolate_boundary, random_spec
from escherblocks.geom import ring_hausdorff, signed_area
from escherblocks.wallpaper import make_group

SQ3 = math.sqrt(3)
KITE_P6 = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, -SQ3 / 3), (0.5, -SQ3 / 2)])


def mc_volume(mesh, n=20000, seed=0):
    """Monte-Carlo volume oracle, independent of the divergence-theorem sum."""
    rng = np.random.default_rng(seed)
    lo, hi = mesh.aabb()
    pts = rng.uniform(lo, hi, size=(n, 3))
    frac = float((points_in_mesh(mesh, pts) >= 0).mean())
    return frac * float(np.prod(hi - lo))


def unit_square_prism(c=1.0):
    G = make_group("p1")
    F = FundamentalDomain(np.array([(0, 0), (1, 0), (1, 1), (0, 1)]), G)
    pairing = edge_pairing(F)
    spec = DeformationSpec.from_intermediates(
        {r: (np.add(*pairing.domain.edge(r)) / 2.0) for r in pairing.representatives})
    return build_block(F, pairing, spec, c)


def example5_block(cleanup=True):
    G = make_group("p4")
    F = FundamentalDomain(np.array([(0, 0), (0, -1), (1, -1), (1, 0)]), G)
    pairing = edge_pairing(F)
    entries = {}
    for r in pairing.representatives:
        a, b = pairing.domain.edge(r)
        key = {tuple(np.round(a, 6)), tuple(np.round(b, 6))}
        entries[r] = (1.0, -1.0) if key == {(0.0, 0.0), (0.0, -1.0)} else (0.0, -2.0)
    return build_block(F, pairing, DeformationSpec.from_intermediates(entries), 1.0,
                       cleanup=cleanup)


def kite_block(seed=3, c=1.0):
    G = make_group("p6")
    F = FundamentalDomain(KITE_P6, G)
    pairing = edge_pairing(F)
    spec = random_spec(pairing, np.random.default_rng(seed))
    return build_block(F, pairing, spec, c)


class TestBuildBlock:
    def test_prism_volume_equals_area(self):
        b = unit_square_prism()
        assert volume(b.mesh) == pytest.approx(1.0, abs=1e-9)
        assert audit_mesh(b.mesh).ok

    def test_example5_artifact_then_cleanup(self):
        raw = example5_block(cleanup=False)
        clean = cleanup_closure(raw.mesh)
        assert clean.n_faces < raw.mesh.n_faces  # artifact pair removed
        assert raw.mesh.n_faces - clean.n_faces == 2
        a = audit_mesh(clean)
        assert a.closed and a.oriented and a.euler == 2
        assert volume(clean) == pytest.approx(1.0, abs=1e-9)
        # the artifact is the membrane triangle between the two lobes
        keyed = {}
        for f in raw.mesh.faces:
            keyed.setdefault(tuple(sorted(map(int, f))), []).append(f)
        dupes = [k for k, v in keyed.items() if len(v) == 2]
        assert len(dupes) == 1
        tri = raw.mesh.vertices[list(dupes[0])]
        want = {(0.5, -0.5, 0.5), (0.0, 0.0, 1.0), (1.0, -1.0, 1.0)}
        assert {tuple(np.round(p, 9)) for p in tri} == want

    def test_example5_already_clean_by_default(self):
        b = example5_block()
        a = audit_mesh(b.mesh)
        assert a.ok and volume(b.mesh) == pytest.approx(1.0, abs=1e-9)

    def test_cleanup_idempotent_on_clean_prism(self):
        b = unit_square_prism()
        assert cleanup_closure(b.mesh).n_faces == b.mesh.n_faces

    def test_cleanup_removes_constructed_duplicate(self):
        b = unit_square_prism()
        faces = np.vstack([b.mesh.faces, b.mesh.faces[:1][:, ::-1]])
        doubled = TriMesh(b.mesh.vertices, faces)
        cleaned = cleanup_closure(doubled)
        assert cleaned.n_faces == b.mesh.n_faces - 1

    def test_kite_block_closed_euler_2(self):
        b = kite_block()
        a = audit_mesh(b.mesh)
        assert a.closed and a.oriented and a.euler == 2

    def test_volume_law_random_specs(self):
        rng = np.random.default_rng(17)
        from escherblocks.domains import dirichlet_domain
        for kind in ("p1", "p2", "pg", "p2gg", "p3", "p4", "p6"):
            G = make_group(kind)
            x = rng.uniform(0.12, 0.38, size=2)
            if not G.is_general_position(x):
                continue
            F = dirichlet_domain(G, x)
            pairing = edge_pairing(F)
            for _ in range(2):
                spec = random_spec(pairing, rng)
                b = build_block(F, pairing, spec, 0.8)
                assert abs(volume(b.mesh) - 0.8 * F.area) <= 1e-6

    def test_height_positive(self):
        G = make_group("p1")
        F = FundamentalDomain(np.array([(0, 0), (1, 0), (1, 1), (0, 1)]), G)
        pairing = edge_pairing(F)
        spec = DeformationSpec.from_intermediates(
            {r: (np.add(*pairing.domain.edge(r)) / 2.0) for r in pairing.representatives})
        with pytest.raises(ValueError):
            build_block(F, pairing, spec, 0.0)


class TestVolumeOracle:
    def test_mc_agrees_prism(self):
        b = unit_square_prism()
        assert mc_volume(b.mesh) == pytest.approx(1.0, abs=0.05)

    def test_mc_agrees_versatile(self):
        from escherblocks.assembly import canonical_versatile
        v = canonical_versatile()
        assert volume(v.mesh) == pytest.approx(2.0, abs=1e-9)
        assert mc_volume(v.mesh) == pytest.approx(2.0, abs=0.1)

    def test_mc_agrees_rhomblock(self):
        from escherblocks.assembly import canonical_rhomblock
        r = canonical_rhomblock()
        assert volume(r.mesh) == pytest.approx(math.sqrt(2) / 2, abs=1e-9)
        assert mc_volume(r.mesh) == pytest.approx(math.sqrt(2) / 2, abs=0.05)

    def test_open_mesh_rejected(self):
        b = unit_square_prism()
        with pytest.raises(MeshTopologyError):
            volume(TriMesh(b.mesh.vertices, b.mesh.faces[:-1]))


class TestSlices:
    def test_end_slices(self):
        b = example5_block()
        assert ring_hausdorff(slice_block(b, 0.0), b.bottom.vertices) < 1e-9
        top = slice_block(b, b.c)
        assert abs(abs(signed_area(top)) - 1.0) < 1e-9

    def test_mid_slice_matches_interpolation(self):
        b = example5_block()
        for z in (0.25, 0.5, 0.75):
            ring = slice_block(b, z)
            want = interpolate_boundary(b.field, z)
            assert ring_hausdorff(ring, want) < 1e-9

    def test_slices_verify_as_domains(self):
        b = example5_block()
        G = b.group
        for z in (0.25, 0.5, 0.75):
            rep = verify_fundamental_domain(G, slice_block(b, z), samples=3000, seed=7)
            assert rep.passed, z

    def test_out_of_range(self):
        b = unit_square_prism()
        with pytest.raises(ValueError):
            slice_block(b, 2.0)

    def test_mesh_section_of_prism(self):
        b = unit_square_prism()
        rings = mesh_section(b.mesh, 0.5)
        assert len(rings) == 1
        assert abs(abs(signed_area(rings[0])) - 1.0) < 1e-9


class TestMirrorIterate:
    def test_mirror_prism_doubles(self):
        b = unit_square_prism()
        m = mirror_block(b)
        assert m.c == pytest.approx(2.0)
        assert volume(m.mesh) == pytest.approx(2.0, abs=1e-9)
        assert audit_mesh(m.mesh).ok

    def test_mirror_kite_symmetric(self):
        b = kite_block()
        m = mirror_block(b)
        assert audit_mesh(m.mesh).ok
        v = m.mesh.vertices.copy()
        v[:, 2] = 2 * b.c - v[:, 2]
        # reflected vertex set through the mid-plane z = c equals the original
        got = {tuple(np.round(p, 8)) for p in v}
        want = {tuple(np.round(p, 8)) for p in m.mesh.vertices}
        assert got == want

    def test_iterate_volume_additive(self):
        b = kite_block()
        stack = iterate_blocks(b, flip_block(b))
        assert volume(stack.mesh) == pytest.approx(2 * volume(b.mesh), abs=1e-9)
        assert audit_mesh(stack.mesh).ok

    def test_iterate_congruence_enforced(self):
        b = kite_block()
        p = unit_square_prism()
        with pytest.raises(ValueError):
            iterate_blocks(b, p)

    def test_mirror_slices(self):
        b = example5_block()
        m = mirror_block(b)
        s = slice_block(m, 0.5 * m.c)  # mid-plane is the original bottom
        assert ring_hausdorff(s, b.bottom.vertices) < 1e-9
        for t in (0.25, 0.75):
            s = slice_block(m, t * m.c)
            want = slice_block(b, abs(2 * t - 1) * b.c)
            assert ring_hausdorff(s, want) < 1e-9


class TestGrowth:
    def test_identity_returns_block(self):
        b = example5_block()
        assert apply_growth(b, lambda t: t) is b

    def test_square_growth_on_prism_keeps_volume(self):
        b = unit_square_prism()
        g = apply_growth(b, lambda t: t * t)
        assert volume(g.mesh) == pytest.approx(volume(b.mesh), abs=1e-9)
        assert audit_mesh(g.mesh).ok

    def test_square_growth_on_p4_block(self):
        # a p4 block with a membrane-free deformation
        from escherblocks.domains import dirichlet_domain
        G = make_group("p4")
        F = dirichlet_domain(G, (0.5, -0.5))
        pairing = edge_pairing(F)
        spec = random_spec(pairing, np.random.default_rng(1))
        b = build_block(F, pairing, spec, 1.0)
        g = apply_growth(b, lambda t: t * t)
        assert audit_mesh(g.mesh).ok
        # slices relocate per the growth function
        for z in (0.25, 0.5, 0.75):
            want = interpolate_boundary(b.field, z * z)
            assert ring_hausdorff(slice_block(g, z), want) < 1e-9
        # numeric integration oracle: stack slice areas over a fine grid;
        # slices of a full fundamental-domain block share one area, so the
        # volume stays c * area even under growth
        zs = np.linspace(0, 1, 401)
        areas = [abs(signed_area(interpolate_boundary(b.field, z * z))) for z in zs]
        quad = float(np.trapezoid(areas, zs))
        assert volume(g.mesh) == pytest.approx(quad, abs=2e-3)
        assert abs(volume(g.mesh) - volume(b.mesh)) < 1e-6

    def test_non_monotone_rejected(self):
        b = example5_block()
        with pytest.raises(InvalidGrowthError):
            apply_growth(b, lambda t: t * (1 - t) * 4)

    def test_membrane_block_growth_raises(self):
        # pinched slices cannot be rebuilt layer by layer
        b = example5_block()
        with pytest.raises(MeshTopologyError):
            apply_growth(b, lambda t: t * t)


def collinear_kite_spec(pairing):
    """Intermediates of the p6 kite placed so all four images share one line."""
    y = -SQ3 / 6
    by_key = {
        frozenset({(0.0, 0.0), (1.0, 0.0)}): (1.0 / 6.0, y),
        frozenset({(0.0, 0.0), (0.5, round(-SQ3 / 2, 6))}): (-1.0 / 6.0, y),
        frozenset({(1.0, 0.0), (1.0, round(-SQ3 / 3, 6))}): (1.5, y),
        frozenset({(1.0, round(-SQ3 / 3, 6)), (0.5, round(-SQ3 / 2, 6))}): (0.5, y),
    }
    entries = {}
    for r in pairing.representatives:
        a, b = pairing.domain.edge(r)
        key = frozenset({tuple(np.round(a, 6)), tuple(np.round(b, 6))})
        entries[r] = by_key[key]
    return DeformationSpec.from_intermediates(entries)


class TestShrink:
    def test_identity_shrink(self):
        b = example5_block()
        ring = []
        dom = b.field.domain
        for i in range(len(dom)):
            ring.append(dom.vertices[i])
            ring.extend(b.field.paths[i].points[1:-1])
        same = shrink_top(b, np.array(ring))
        assert same is b

    def test_missing_intermediate_rejected(self):
        b = example5_block()
        dom = b.field.domain
        ring = []
        for i in range(len(dom)):
            ring.append(dom.vertices[i])
            for p in b.field.paths[i].points[1:-1]:
                ring.append(p + (0.05, 0.05))  # move the intermediate: invalid
        with pytest.raises(ContainmentError):
            shrink_top(b, np.array(ring))

    def test_ridge_shrink_contained(self):
        # the collinear-intermediate scenario: tops collapse onto the line
        G = make_group("p6")
        F = FundamentalDomain(KITE_P6, G)
        pairing = edge_pairing(F)
        spec = collinear_kite_spec(pairing)
        b = build_block(F, pairing, spec, 0.6)
        dom = pairing.domain
        y = -SQ3 / 6
        ring = []
        for i in range(len(dom)):
            v = dom.vertices[i]
            ring.append((v[0], y))
            for p in b.field.paths[i].points[1:-1]:
                ring.append(tuple(p))
        shrunk = shrink_top(b, np.array(ring))
        a = audit_mesh(shrunk.mesh)
        assert a.closed and a.oriented
        assert volume(shrunk.mesh) < volume(b.mesh)
        # sampled containment in the original
        rng = np.random.default_rng(5)
        lo, hi = shrunk.mesh.aabb()
        pts = rng.uniform(lo, hi, size=(10000, 3))
        inner = pts[points_in_mesh(shrunk.mesh, pts) == 1]
        assert len(inner) > 100
        assert (points_in_mesh(b.mesh, inner) >= 0).all()
        # the both-sides composition of the shrunken block still audits
        both = iterate_blocks(flip_block(shrunk), shrunk)
        assert audit_mesh(both.mesh).closed


class TestApproxBlock:
    @staticmethod
    def sine(t):
        return np.array([t, math.sin(2 * math.pi * t) / math.pi])

    def p4_unit_square(self):
        G = make_group("p4")
        F = FundamentalDomain(np.array([(0, 0), (1, 0), (1, 1), (0, 1)]), G)
        return G, F, edge_pairing(F)

    def test_sine_block_small(self):
        G, F, pairing = self.p4_unit_square()
        rep = [r for r in pairing.representatives
               if {tuple(np.round(p, 6)) for p in pairing.domain.edge(r)}
               == {(0.0, 0.0), (1.0, 0.0)}][0]
        b = build_approx_block(F, pairing, {rep: self.sine}, N=4, a=2, c=1.0)
        a = audit_mesh(b.mesh)
        assert a.closed and a.oriented and a.euler == 2
        assert volume(b.mesh) > 0

    def test_sine_block_paper_parameters(self):
        G, F, pairing = self.p4_unit_square()
        rep = [r for r in pairing.representatives
               if {tuple(np.round(p, 6)) for p in pairing.domain.edge(r)}
               == {(0.0, 0.0), (1.0, 0.0)}][0]
        b = build_approx_block(F, pairing, {rep: self.sine}, N=10, a=3, c=1.0)
        a = audit_mesh(b.mesh)
        assert a.closed and a.oriented and a.euler == 2
