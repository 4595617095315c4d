"""Truchet and lozenge tiling combinatorics.

Truchet tiles here are the rhombi themselves: each tile's state says which
pair of adjacent edges is covered ("black").  The touch rule (facing colours
differ) propagates one free bit per NE-row and one per NW-column, which is
exactly the 2^(n+m) count.  Lozenge tilings live on the triangular lattice as
perfect matchings of the face-adjacency (standard) graph.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

E1 = np.array([1.0, 0.0])
E2 = np.array([0.5, math.sqrt(3) / 2])

# state encoding: 2*a + b where a = NE-edge colour, b = NW-edge colour
STATE_NAMES = {3: "N", 2: "E", 0: "S", 1: "W"}
STATE_OF_BITS = {(1, 1): 3, (1, 0): 2, (0, 0): 0, (0, 1): 1}

TRUCHET_SIZE_GUARD = 24
LOZENGE_TRIANGLE_GUARD = 60


class TilingError(ValueError):
    pass


class SizeGuardError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Truchet tilings

@dataclass(frozen=True, eq=False)
class TruchetTiling:
    """n x m grid of rhombic Truchet tiles with a valid colouring.

    states[i, j] encodes (NE colour, NW colour); the touch rule forces the NE
    colour to be constant along each i-row and the NW colour along each j-column.
    """

    n: int
    m: int
    states: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.states, dtype=np.int64)
        if s.shape != (self.n, self.m):
            raise TilingError(f"states must be shaped ({self.n}, {self.m})")
        if s.min() < 0 or s.max() > 3:
            raise TilingError("states must be in 0..3")
        object.__setattr__(self, "states", s)
        if not self._rule_holds():
            raise TilingError("tiling violates the touch rule")

    def _rule_holds(self) -> bool:
        a = self.states >> 1
        b = self.states & 1
        return bool((a == a[:, :1]).all() and (b == b[:1, :]).all())

    @property
    def row_bits(self) -> np.ndarray:
        return (self.states[:, 0] >> 1).astype(int)

    @property
    def col_bits(self) -> np.ndarray:
        return (self.states[0, :] & 1).astype(int)

    def state_name(self, i: int, j: int) -> str:
        return STATE_NAMES[int(self.states[i, j])]

    @staticmethod
    def from_bits(row_bits, col_bits) -> "TruchetTiling":
        row_bits = [int(x) & 1 for x in row_bits]
        col_bits = [int(x) & 1 for x in col_bits]
        n, m = len(row_bits), len(col_bits)
        states = np.zeros((n, m), dtype=np.int64)
        for i, j in itertools.product(range(n), range(m)):
            states[i, j] = STATE_OF_BITS[(row_bits[i], col_bits[j])]
        return TruchetTiling(n, m, states)

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "states": self.states.tolist()}

    @staticmethod
    def from_json(obj) -> "TruchetTiling":
        return TruchetTiling(int(obj["n"]), int(obj["m"]), np.asarray(obj["states"]))


def count_truchet(n: int, m: int) -> int:
    """Number of valid n x m Truchet tilings: 2^(n+m)."""
    if n < 1 or m < 1:
        raise TilingError("grid dimensions must be positive")
    return 2 ** (n + m)


def enumerate_truchet(n: int, m: int) -> list[TruchetTiling]:
    """All tilings, one per assignment of row and column boundary colours."""
    if n < 1 or m < 1:
        raise TilingError("grid dimensions must be positive")
    if n + m > TRUCHET_SIZE_GUARD:
        raise SizeGuardError(f"n+m must stay <= {TRUCHET_SIZE_GUARD}")
    out = []
    for row_bits in itertools.product((0, 1), repeat=n):
        for col_bits in itertools.product((0, 1), repeat=m):
            out.append(TruchetTiling.from_bits(row_bits, col_bits))
    return out


def truchet_uniform(n: int, m: int, state: int = 1) -> TruchetTiling:
    bits = {v: k for k, v in STATE_OF_BITS.items()}[state]
    return TruchetTiling.from_bits([bits[0]] * n, [bits[1]] * m)


def truchet_stripes(n: int, m: int) -> TruchetTiling:
    """Alternating rows, constant columns (a glide-symmetric pattern)."""
    return TruchetTiling.from_bits([i % 2 for i in range(n)], [1] * m)


def truchet_checker(n: int, m: int) -> TruchetTiling:
    """Alternating rows and columns (a fourfold-symmetric pattern)."""
    return TruchetTiling.from_bits([i % 2 for i in range(n)], [j % 2 for j in range(m)])


# ---------------------------------------------------------------------------
# triangular lattice regions and lozenge tilings

def lattice_point(i: int, j: int) -> np.ndarray:
    return i * E1 + j * E2


def triangle_corners(tri) -> np.ndarray:
    kind, i, j = tri
    if kind == "U":
        return np.array([lattice_point(i, j), lattice_point(i + 1, j), lattice_point(i, j + 1)])
    return np.array([lattice_point(i + 1, j), lattice_point(i, j + 1), lattice_point(i + 1, j + 1)])


def triangle_centroid(tri) -> np.ndarray:
    return triangle_corners(tri).mean(axis=0)


def triangle_neighbors(tri):
    kind, i, j = tri
    if kind == "U":
        return [("D", i, j), ("D", i - 1, j), ("D", i, j - 1)]
    return [("U", i, j), ("U", i + 1, j), ("U", i, j + 1)]


@dataclass(frozen=True, eq=False)
class HexRegion:
    """Semiregular hexagon with side lengths a, b, c on the triangular lattice."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        if min(self.a, self.b, self.c) < 1:
            raise TilingError("hexagon sides must be >= 1")

    def boundary(self) -> np.ndarray:
        a, b, c = self.a, self.b, self.c
        dirs = [E1, E2, E2 - E1, -E1, -E2, E1 - E2]
        steps = [a, b, c, a, b, c]
        pts = [np.zeros(2)]
        for d, k in zip(dirs, steps):
            pts.append(pts[-1] + k * d)
        return np.array(pts[:-1])

    def triangles(self) -> list[tuple]:
        from .geom import point_in_ring
        ring = self.boundary()
        out = []
        span = self.a + self.b + self.c
        for i in range(-span, span + 1):
            for j in range(-span, span + 1):
                for kind in ("U", "D"):
                    tri = (kind, i, j)
                    if point_in_ring(ring, triangle_centroid(tri)) >= 0:
                        cs = triangle_corners(tri)
                        if all(point_in_ring(ring, p) >= 0 for p in cs):
                            out.append(tri)
        out.sort()
        return out

    def n_lozenges(self) -> int:
        return self.a * self.b + self.b * self.c + self.c * self.a

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c}


def region_triangles(region) -> list[tuple]:
    if isinstance(region, HexRegion):
        return region.triangles()
    return sorted(region)


@dataclass(frozen=True, eq=False)
class LozengeTiling:
    """Perfect matching of a region's triangles into adjacent pairs."""

    triangles: tuple
    matching: tuple  # tuple of (triA, triB) pairs, each sorted, whole tuple sorted

    def __post_init__(self):
        tris = tuple(sorted(self.triangles))
        pairs = tuple(sorted(tuple(sorted(p)) for p in self.matching))
        object.__setattr__(self, "triangles", tris)
        object.__setattr__(self, "matching", pairs)
        covered = [t for p in pairs for t in p]
        if sorted(covered) != list(tris):
            raise TilingError("matching is not perfect on the region")
        for p, q in pairs:
            if q not in triangle_neighbors(p):
                raise TilingError(f"pair {p}, {q} is not an adjacent triangle pair")

    def lozenges(self) -> list[tuple]:
        return list(self.matching)

    def to_json(self) -> dict:
        return {"triangles": [list(t) for t in self.triangles],
                "matching": [[list(p), list(q)] for p, q in self.matching]}

    @staticmethod
    def from_json(obj) -> "LozengeTiling":
        tris = tuple(tuple(t) for t in obj["triangles"])
        pairs = tuple((tuple(p), tuple(q)) for p, q in obj["matching"])
        return LozengeTiling(tris, pairs)


def macmahon_count(region: HexRegion) -> int:
    """Boxed plane-partition product formula, evaluated in exact rationals."""
    total = Fraction(1)
    for i in range(1, region.a + 1):
        for j in range(1, region.b + 1):
            for k in range(1, region.c + 1):
                total *= Fraction(i + j + k - 1, i + j + k - 2)
    if total.denominator != 1:
        raise AssertionError("product formula did not reduce to an integer")
    return int(total)


def enumerate_lozenge(region) -> list[LozengeTiling]:
    """All perfect matchings of the region's triangles, by backtracking."""
    tris = region_triangles(region)
    if len(tris) > LOZENGE_TRIANGLE_GUARD:
        raise SizeGuardError(f"region has {len(tris)} triangles; guard is "
                             f"{LOZENGE_TRIANGLE_GUARD}")
    tri_set = set(tris)
    order = sorted(tris)
    out: list[LozengeTiling] = []

    def backtrack(unmatched: set, acc: list):
        if not unmatched:
            out.append(LozengeTiling(tuple(tris), tuple(acc)))
            return
        t = min(u for u in order if u in unmatched)
        for nb in triangle_neighbors(t):
            if nb in unmatched:
                unmatched.discard(t)
                unmatched.discard(nb)
                acc.append((t, nb))
                backtrack(unmatched, acc)
                acc.pop()
                unmatched.add(t)
                unmatched.add(nb)

    backtrack(set(tri_set), [])
    uniq = {t.matching: t for t in out}
    return [uniq[k] for k in sorted(uniq)]


# ---------------------------------------------------------------------------
# the three graph encodings

@dataclass(frozen=True, eq=False)
class StandardGraph:
    nodes: tuple          # triangles
    edges: tuple          # adjacent triangle pairs (sorted)
    matching: tuple       # subset of edges

    def to_json(self) -> dict:
        return {"nodes": [list(t) for t in self.nodes],
                "edges": [[list(p), list(q)] for p, q in self.edges],
                "matching": [[list(p), list(q)] for p, q in self.matching]}


@dataclass(frozen=True, eq=False)
class EdgeGraph:
    nodes: tuple          # edges of the standard graph
    links: tuple          # node pairs sharing a triangle
    independent: tuple    # maximal independent set = the matching

    def to_json(self) -> dict:
        return {"nodes": [[list(p), list(q)] for p, q in self.nodes],
                "links": [[i, j] for i, j in self.links],
                "independent": [[list(p), list(q)] for p, q in self.independent]}


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    nodes: tuple          # lozenges (matched pairs)
    arcs: tuple           # (k, l) node indices: black part of k meets white part of l

    def to_json(self) -> dict:
        return {"nodes": [[list(p), list(q)] for p, q in self.nodes],
                "arcs": [[k, l] for k, l in self.arcs]}


@dataclass(frozen=True, eq=False)
class TilingGraphs:
    standard: StandardGraph
    edge_graph: EdgeGraph
    directed: DirectedGraph


def _region_edges(tris: tuple) -> list[tuple]:
    tri_set = set(tris)
    edges = set()
    for t in tris:
        for nb in triangle_neighbors(t):
            if nb in tri_set:
                edges.add(tuple(sorted((t, nb))))
    return sorted(edges)


def _down_part(pair) -> tuple:
    p, q = pair
    return p if p[0] == "D" else q


def _up_part(pair) -> tuple:
    p, q = pair
    return p if p[0] == "U" else q


def to_graphs(T: LozengeTiling) -> TilingGraphs:
    """The standard, edge and directed graphs of a lozenge tiling."""
    tris = T.triangles
    edges = tuple(_region_edges(tris))
    matching = T.matching
    std = StandardGraph(tris, edges, matching)

    links = []
    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            if set(edges[i]) & set(edges[j]):
                links.append((i, j))
    eg = EdgeGraph(edges, tuple(links), matching)

    loz = list(matching)
    arcs = []
    for k, pk in enumerate(loz):
        down = _down_part(pk)
        for l, pl in enumerate(loz):
            if k == l:
                continue
            up = _up_part(pl)
            if up in triangle_neighbors(down):
                arcs.append((k, l))
    dg = DirectedGraph(tuple(loz), tuple(sorted(arcs)))
    return TilingGraphs(std, eg, dg)


def from_standard(std: StandardGraph) -> LozengeTiling:
    """Recover the tiling from the standard graph and its perfect matching."""
    edge_set = set(std.edges)
    for p in std.matching:
        if tuple(sorted(p)) not in edge_set:
            raise TilingError("matching uses a non-edge")
    return LozengeTiling(std.nodes, std.matching)


def from_edge_graph(eg: EdgeGraph) -> LozengeTiling:
    """Recover the tiling from the edge graph and a maximal independent set."""
    chosen = [tuple(sorted(p)) for p in eg.independent]
    node_set = set(eg.nodes)
    for p in chosen:
        if p not in node_set:
            raise TilingError("independent set uses an unknown node")
    index_of = {e: i for i, e in enumerate(eg.nodes)}
    link_set = set(eg.links)
    ids = [index_of[p] for p in chosen]
    for x, y in itertools.combinations(sorted(ids), 2):
        if (x, y) in link_set or (y, x) in link_set:
            raise TilingError("chosen set is not independent")
    tris = tuple(sorted({t for e in eg.nodes for t in e}))
    return LozengeTiling(tris, tuple(chosen))


def from_directed(dg: DirectedGraph, region) -> LozengeTiling:
    """Recover the tiling from the directed graph's embedded nodes.

    Nodes carry their lattice placement, so reconstruction reads them off
    directly; the arcs and the region are validated against the result.
    """
    tris = tuple(sorted(region_triangles(region)))
    tiling = LozengeTiling(tris, dg.nodes)
    back = to_graphs(tiling).directed
    if tuple(sorted(back.arcs)) != tuple(sorted(dg.arcs)):
        raise TilingError("directed graph arcs are inconsistent with the region")
    return tiling


# ---------------------------------------------------------------------------
# VersaTile tilings from lozenge tilings

@dataclass(frozen=True, eq=False)
class VersaTileTiling:
    """A lozenge tiling together with one of the two bipartite colourings.

    ``claimed`` names the triangle class (down or up) whose hexagon each
    block's top face occupies.
    """

    tiling: LozengeTiling
    claimed: str  # "D" or "U"

    def placements_2d(self) -> list[tuple]:
        """Planar placement (angle_deg, translation) per lozenge.

        The reference lozenge is the pair down(0,-1), up(0,0) sharing the edge
        {P(0,0), P(1,0)}; the claimed triangle lands on the reference down
        triangle via a rotation by a multiple of 60 degrees plus translation.
        """
        ref_claimed = ("D", 0, -1)
        ref_other = ("U", 0, 0)
        ref_centroid = triangle_centroid(ref_claimed)
        out = []
        for pair in self.tiling.lozenges():
            claimed_tri = _down_part(pair) if self.claimed == "D" else _up_part(pair)
            other = _up_part(pair) if self.claimed == "D" else _down_part(pair)
            for k in range(6):
                ang = 60.0 * k
                rad = math.radians(ang)
                rot = np.array([[math.cos(rad), -math.sin(rad)],
                                [math.sin(rad), math.cos(rad)]])
                tcl = triangle_centroid(claimed_tri) - rot @ ref_centroid
                corners = triangle_corners(ref_claimed) @ rot.T + tcl
                if _same_point_set(corners, triangle_corners(claimed_tri)):
                    other_corners = triangle_corners(ref_other) @ rot.T + tcl
                    if _same_point_set(other_corners, triangle_corners(other)):
                        out.append((ang, tcl))
                        break
            else:
                raise TilingError(f"no lattice rotation places lozenge {pair}")
        return out


def _same_point_set(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    if len(a) != len(b):
        return False
    used = set()
    for p in a:
        hit = None
        for i, q in enumerate(b):
            if i not in used and np.linalg.norm(p - q) <= tol:
                hit = i
                break
        if hit is None:
            return False
        used.add(hit)
    return True


def versatile_tilings_from_lozenge(T: LozengeTiling) -> tuple[VersaTileTiling, VersaTileTiling]:
    """The two block tilings induced by a lozenge tiling (one per colouring)."""
    return VersaTileTiling(T, "D"), VersaTileTiling(T, "U")
