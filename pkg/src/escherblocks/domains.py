"""Fundamental domains as polygons: Dirichlet construction, edge pairing,
area invariance and sampled verification of the tiling property."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .geom import (BTOL, EPS, as_ring, centroid, clip_halfplane, dedup_ring,
                   ensure_ccw, point_ring_distance, points_in_ring, ring_is_weakly_simple,
                   signed_area, strip_collinear)
from .wallpaper import Isometry2, WallpaperGroup


class GeneralPositionError(ValueError):
    pass


class PairingError(ValueError):
    pass


@dataclass(frozen=True)
class FundamentalDomain:
    """Simple (or weakly simple) ccw polygon tied to a wallpaper group.

    Edges are implicit: edge i joins vertices[i] to vertices[i+1] cyclically.
    """

    vertices: np.ndarray
    group: WallpaperGroup | None = None

    def __post_init__(self):
        v = ensure_ccw(as_ring(self.vertices))
        if signed_area(v) <= EPS:
            raise ValueError("polygon must have positive area")
        if not ring_is_weakly_simple(v):
            raise ValueError("polygon boundary crosses itself")
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return len(self.vertices)

    def edge(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        n = len(self.vertices)
        return self.vertices[i % n], self.vertices[(i + 1) % n]

    def edges(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [self.edge(i) for i in range(len(self.vertices))]

    @property
    def area(self) -> float:
        return float(signed_area(self.vertices))

    @property
    def centroid(self) -> np.ndarray:
        return centroid(self.vertices)

    def diameter(self) -> float:
        v = self.vertices
        return float(max(np.linalg.norm(v[i] - v[j])
                         for i in range(len(v)) for j in range(i + 1, len(v))))

    def with_vertex_inserted(self, edge_index: int, p: np.ndarray) -> "FundamentalDomain":
        v = self.vertices
        n = len(v)
        out = np.vstack([v[:edge_index + 1], [p], v[edge_index + 1:]]) if edge_index < n - 1 \
            else np.vstack([v, [p]])
        return FundamentalDomain(out, self.group)

    def to_json(self) -> list:
        return self.vertices.tolist()

    @staticmethod
    def from_json(obj, group: WallpaperGroup | None = None) -> "FundamentalDomain":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return FundamentalDomain(np.asarray(obj, dtype=float), group)


def area(F: FundamentalDomain) -> float:
    """Shoelace area; equals |det(t1|t2)| / point-group order for any domain."""
    return F.area


# ---------------------------------------------------------------------------
# Dirichlet domains

def dirichlet_domain(G: WallpaperGroup, x) -> FundamentalDomain:
    """Dirichlet (Voronoi) cell of a general-position point x.

    Intersection of bisector half-planes against every orbit point within
    radius 3 * max lattice norm, clipped from a generous bounding square.
    """
    x = np.asarray(x, dtype=float)
    if not G.is_general_position(x):
        raise GeneralPositionError(f"point {x.tolist()} is fixed by a non-identity element")
    radius = 3.0 * G.max_lattice_norm()
    neighbors = [p for p, _ in G.orbit_in_disk(x, radius) if np.linalg.norm(p - x) > EPS]
    neighbors.sort(key=lambda p: (np.linalg.norm(p - x), p[0], p[1]))
    big = 2.0 * radius
    poly = np.array([x + [-big, -big], x + [big, -big], x + [big, big], x + [-big, big]])
    for q in neighbors:
        n = q - x
        d = float(n @ (x + q) / 2.0)
        poly = clip_halfplane(poly, n, d)
        if len(poly) == 0:
            raise RuntimeError("Dirichlet cell clipped to nothing")
    poly = strip_collinear(dedup_ring(poly))
    # deterministic start vertex: lexicographic minimum
    start = min(range(len(poly)), key=lambda i: (round(poly[i][0] / BTOL), round(poly[i][1] / BTOL)))
    poly = np.vstack([poly[start:], poly[:start]])
    return FundamentalDomain(poly, G)


# ---------------------------------------------------------------------------
# edge pairing

@dataclass(frozen=True)
class EdgePairing:
    """Total pairing of a domain's edges under its group.

    ``domain`` may be a refinement of the input: edges mapped to themselves
    reversed by a half-turn are split at the fixed midpoint first, so every
    pair joins two distinct edges.  ``pairs`` holds (i, j, g) with
    g(edge_i) = edge_j setwise and i the representative.
    """

    domain: FundamentalDomain
    pairs: tuple

    @property
    def representatives(self) -> list[int]:
        return [i for i, _, _ in self.pairs]

    def partner(self, i: int) -> int:
        for a, b, _ in self.pairs:
            if a == i:
                return b
            if b == i:
                return a
        raise KeyError(i)

    def iso(self, i: int) -> Isometry2:
        """Isometry mapping representative edge i onto its partner."""
        for a, b, g in self.pairs:
            if a == i:
                return g
        raise KeyError(i)


def _maps_edge(g: Isometry2, e_from, e_to, tol: float = BTOL) -> bool:
    a, b = e_from
    c, d = e_to
    ga, gb = g(a), g(b)
    return ((np.linalg.norm(ga - c) <= tol and np.linalg.norm(gb - d) <= tol)
            or (np.linalg.norm(ga - d) <= tol and np.linalg.norm(gb - c) <= tol))


def edge_pairing(F: FundamentalDomain) -> EdgePairing:
    """Group the domain's edges into pairs identified by the group action.

    Searches group elements within a 5x5-cell translation window.  Fails with
    PairingError when an edge has no partner (invalid domain or tolerance).
    """
    G = F.group
    if G is None:
        raise PairingError("domain has no group attached")
    elements = G.elements_near(F.centroid, 3.0 * (np.linalg.norm(G.t1) + np.linalg.norm(G.t2)) + F.diameter())
    elements = [g for g in elements if not g.is_identity()]

    # split self-paired edges (2-fold centre on the edge midpoint)
    domain = F
    changed = True
    while changed:
        changed = False
        for i in range(len(domain)):
            a, b = domain.edge(i)
            for g in elements:
                if np.linalg.norm(g(a) - b) <= BTOL and np.linalg.norm(g(b) - a) <= BTOL:
                    m = (a + b) / 2.0
                    if np.linalg.norm(g(m) - m) > BTOL:
                        continue
                    domain = domain.with_vertex_inserted(i, m)
                    changed = True
                    break
            if changed:
                break

    n = len(domain)
    if n % 2 != 0:
        raise PairingError(f"odd edge count {n} cannot be paired")
    paired: dict[int, tuple[int, Isometry2]] = {}
    used: set[int] = set()
    for i in range(n):
        if i in used:
            continue
        found = False
        for j in range(n):
            if j == i or j in used:
                continue
            for g in elements:
                if _maps_edge(g, domain.edge(i), domain.edge(j)):
                    paired[i] = (j, g)
                    used.add(i)
                    used.add(j)
                    found = True
                    break
            if found:
                break
        if not found:
            raise PairingError(f"edge {i} of the domain has no partner under the group")
    pairs = tuple((i, j, g) for i, (j, g) in sorted(paired.items()))
    return EdgePairing(domain, pairs)


# ---------------------------------------------------------------------------
# sampled verification of the tiling property

@dataclass(frozen=True)
class VerificationReport:
    covered_fraction: float
    overlap_fraction: float
    passed: bool
    samples: int
    seed: int

    def to_json(self) -> dict:
        return {"covered_fraction": self.covered_fraction,
                "overlap_fraction": self.overlap_fraction,
                "pass": self.passed, "samples": self.samples, "seed": self.seed}


def verify_fundamental_domain(G: WallpaperGroup, P, window: float | None = None,
                              samples: int = 10_000, seed: int = 0) -> VerificationReport:
    """Monte-Carlo check that the orbit of P tessellates a window disk.

    Every sample must lie in at least one orbit image (coverage) and strictly
    interior samples in exactly one image interior (no overlap).  Samples
    within BTOL of any image boundary count as covered but never as overlap.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    ring = P.vertices if isinstance(P, FundamentalDomain) else ensure_ccw(as_ring(np.asarray(P, dtype=float)))
    center = centroid(ring)
    if window is None:
        window = G.max_lattice_norm()
    diam = float(max(np.linalg.norm(v - center) for v in ring))

    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2 * np.pi, samples)
    radii = window * np.sqrt(rng.uniform(0.0, 1.0, samples))
    pts = center + np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])

    inside_count = np.zeros(samples, dtype=int)
    boundary_any = np.zeros(samples, dtype=bool)
    for g in G.elements_near(center, window + 2.0 * diam + G.lattice_diameter()):
        ginv = g.inverse()
        local = pts @ ginv.linear.T + ginv.translation
        cls = points_in_ring(ring, local)
        inside_count += (cls == 1)
        boundary_any |= (cls == 0)

    covered = (inside_count >= 1) | boundary_any
    overlap = inside_count >= 2
    report = VerificationReport(
        covered_fraction=float(covered.mean()),
        overlap_fraction=float(overlap.mean()),
        passed=bool(covered.all() and not overlap.any()),
        samples=samples, seed=seed)
    return report
