import itertools

import numpy as np
import pytest

from escherblocks.tilings import (DirectedGraph, HexRegion, LozengeTiling, SizeGuardError,
                                  TilingError, TruchetTiling, count_truchet,
                                  enumerate_lozenge, enumerate_truchet, from_directed,
                                  from_edge_graph, from_standard, macmahon_count,
                                  to_graphs, triangle_neighbors, truchet_checker,
                                  truchet_stripes, truchet_uniform,
                                  versatile_tilings_from_lozenge)


def brute_force_matchings(region):
    """Independent oracle: enumerate perfect matchings with plain recursion
    over an adjacency dict (no lattice geometry reuse)."""
    tris = region.triangles()
    adj = {t: [n for n in triangle_neighbors(t) if n in set(tris)] for t in tris}

    def count(unmatched):
        if not unmatched:
            return 1
        t = min(unmatched)
        rest = unmatched - {t}
        total = 0
        for nb in adj[t]:
            if nb in rest:
                total += count(rest - {nb})
        return total

    return count(frozenset(tris))


class TestTruchet:
    def test_counts(self):
        assert count_truchet(1, 1) == 4
        assert count_truchet(2, 3) == 32

    def test_enumeration_matches_formula(self):
        for n, m in [(1, 1), (2, 2), (3, 3), (2, 3)]:
            tilings = enumerate_truchet(n, m)
            assert len(tilings) == count_truchet(n, m)

    def test_enumeration_formula_up_to_4(self):
        for n in range(1, 5):
            for m in range(1, 5):
                assert len(enumerate_truchet(n, m)) == 2 ** (n + m)

    def test_all_zero_boundary_constant(self):
        t = TruchetTiling.from_bits([0, 0], [0, 0])
        assert (t.states == t.states[0, 0]).all()

    def test_rule_checker_rejects(self):
        bad = np.array([[3, 3], [2, 3]])
        with pytest.raises(TilingError):
            TruchetTiling(2, 2, bad)

    def test_boundary_bijection(self):
        seen = set()
        for t in enumerate_truchet(3, 2):
            key = (tuple(t.row_bits), tuple(t.col_bits))
            assert key not in seen
            seen.add(key)
        assert len(seen) == 2 ** 5

    def test_size_guard(self):
        with pytest.raises(SizeGuardError):
            enumerate_truchet(20, 20)

    def test_named_patterns(self):
        assert truchet_uniform(2, 2, state=1).states.tolist() == [[1, 1], [1, 1]]
        assert truchet_stripes(2, 2).n == 2
        assert truchet_checker(2, 2).m == 2

    def test_json_roundtrip(self):
        t = truchet_checker(3, 2)
        t2 = TruchetTiling.from_json(t.to_json())
        assert (t2.states == t.states).all()


class TestMacMahon:
    @pytest.mark.parametrize("abc,want", [((1, 1, 1), 2), ((1, 1, 2), 3), ((1, 2, 2), 6),
                                          ((2, 2, 2), 20), ((1, 2, 3), 10), ((1, 1, 3), 4)])
    def test_formula_values(self, abc, want):
        assert macmahon_count(HexRegion(*abc)) == want

    @pytest.mark.parametrize("abc", [(1, 1, 1), (1, 1, 2), (1, 2, 2), (2, 2, 2),
                                     (1, 2, 3), (1, 1, 3)])
    def test_formula_matches_bruteforce(self, abc):
        region = HexRegion(*abc)
        assert macmahon_count(region) == brute_force_matchings(region)

    def test_region_triangle_count(self):
        region = HexRegion(2, 2, 2)
        assert len(region.triangles()) == 2 * region.n_lozenges()
        assert region.n_lozenges() == 12


class TestEnumerateLozenge:
    def test_hexagon_111(self):
        assert len(enumerate_lozenge(HexRegion(1, 1, 1))) == 2

    def test_hexagon_222(self):
        assert len(enumerate_lozenge(HexRegion(2, 2, 2))) == 20

    def test_matches_macmahon(self):
        for abc in [(1, 1, 1), (1, 1, 2), (1, 2, 2), (2, 2, 2), (1, 2, 3), (1, 1, 3)]:
            region = HexRegion(*abc)
            assert len(enumerate_lozenge(region)) == macmahon_count(region)

    def test_single_lozenge_region(self):
        tris = (("U", 0, 0), ("D", 0, 0))
        tilings = enumerate_lozenge(tris)
        assert len(tilings) == 1
        assert tilings[0].matching == ((("D", 0, 0), ("U", 0, 0)),)

    def test_size_guard(self):
        with pytest.raises(SizeGuardError):
            enumerate_lozenge(HexRegion(4, 4, 4))

    def test_matchings_valid(self):
        for t in enumerate_lozenge(HexRegion(1, 2, 2)):
            for p, q in t.matching:
                assert q in triangle_neighbors(p)


class TestGraphs:
    def test_single_lozenge_graphs(self):
        tris = (("U", 0, 0), ("D", 0, 0))
        t = enumerate_lozenge(tris)[0]
        g = to_graphs(t)
        assert len(g.standard.nodes) == 2
        assert len(g.standard.matching) == 1
        assert len(g.directed.nodes) == 1
        assert len(g.directed.arcs) == 0

    def test_roundtrips_hexagon_111(self):
        for t in enumerate_lozenge(HexRegion(1, 1, 1)):
            g = to_graphs(t)
            assert from_standard(g.standard).matching == t.matching
            assert from_edge_graph(g.edge_graph).matching == t.matching
            assert from_directed(g.directed, HexRegion(1, 1, 1)).matching == t.matching

    def test_roundtrips_hexagon_222_all(self):
        region = HexRegion(2, 2, 2)
        tilings = enumerate_lozenge(region)
        assert len(tilings) == 20
        for t in tilings:
            g = to_graphs(t)
            assert from_standard(g.standard).matching == t.matching
            assert from_edge_graph(g.edge_graph).matching == t.matching
            assert from_directed(g.directed, region).matching == t.matching

    def test_directed_arc_mismatch_rejected(self):
        region = HexRegion(1, 1, 1)
        t0, t1 = enumerate_lozenge(region)
        g0 = to_graphs(t0)
        wrong = DirectedGraph(t1.matching, g0.directed.arcs)
        with pytest.raises(TilingError):
            from_directed(wrong, region)

    def test_edge_graph_independence_enforced(self):
        t = enumerate_lozenge(HexRegion(1, 1, 1))[0]
        g = to_graphs(t)
        from escherblocks.tilings import EdgeGraph
        bad = EdgeGraph(g.edge_graph.nodes, g.edge_graph.links,
                        tuple(g.edge_graph.nodes[:len(t.matching) + 1]))
        with pytest.raises(TilingError):
            from_edge_graph(bad)

    def test_matching_is_independent_set(self):
        # the matching nodes form an independent set in the edge graph
        for t in enumerate_lozenge(HexRegion(1, 1, 2)):
            g = to_graphs(t)
            index_of = {e: i for i, e in enumerate(g.edge_graph.nodes)}
            ids = {index_of[tuple(sorted(p))] for p in t.matching}
            for x, y in g.edge_graph.links:
                assert not (x in ids and y in ids)


class TestVersaTileTilings:
    def test_two_per_lozenge_tiling(self):
        t = enumerate_lozenge(HexRegion(1, 1, 1))[0]
        v1, v2 = versatile_tilings_from_lozenge(t)
        assert v1.claimed != v2.claimed

    def test_single_lozenge_two_orientations(self):
        tris = (("U", 0, 0), ("D", 0, 0))
        t = enumerate_lozenge(tris)[0]
        a, b = versatile_tilings_from_lozenge(t)
        pa, pb = a.placements_2d(), b.placements_2d()
        assert len(pa) == 1 and len(pb) == 1
        assert not (pa[0][0] == pb[0][0] and np.allclose(pa[0][1], pb[0][1]))

    def test_hexagon111_four_distinct(self):
        keys = set()
        for t in enumerate_lozenge(HexRegion(1, 1, 1)):
            for v in versatile_tilings_from_lozenge(t):
                key = tuple((round(a, 6), round(x, 9), round(y, 9))
                            for a, (x, y) in v.placements_2d())
                keys.add(key)
        assert len(keys) == 4

    def test_placements_cover_all_lozenges(self):
        for t in enumerate_lozenge(HexRegion(1, 2, 2)):
            for v in versatile_tilings_from_lozenge(t):
                assert len(v.placements_2d()) == len(t.matching)
