"""Assemblies of block copies under lifted group actions, the sampled
assembly-property checker, the two canonical blocks with their combinatorial
placement rules, and two-block contact enumeration."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .blocks import (Block, MeshTopologyError, TriMesh, audit_mesh, mesh_from,
                     orient_consistently, points_in_mesh, VertexPool)
from .domains import FundamentalDomain
from .escher import versatile_construction
from .geom import BTOL, EPS, dedup_ring, ensure_ccw
from .tilings import LozengeTiling, TruchetTiling, VersaTileTiling
from .wallpaper import Isometry2, Isometry3, WallpaperGroup, lift_to_3d, make_group

SQ3 = math.sqrt(3)
RHOMBLOCK_HEIGHT = math.sqrt(2.0 / 3.0)


class ProvenanceError(ValueError):
    pass


@dataclass(frozen=True)
class Placement:
    iso: Isometry3
    label: str
    is_frame: bool = False

    def to_json(self) -> dict:
        return {"matrix": self.iso.to_json()["matrix"], "label": self.label,
                "frame": self.is_frame}


@dataclass(frozen=True, eq=False)
class Assembly:
    block: Block
    placements: tuple

    def __post_init__(self):
        ps = tuple(self.placements)
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                if ps[i].iso.approx_eq(ps[j].iso):
                    raise ValueError(f"placements {i} and {j} coincide")
        object.__setattr__(self, "placements", ps)

    def __len__(self) -> int:
        return len(self.placements)

    def placed_vertices(self, k: int) -> np.ndarray:
        return self.placements[k].iso(self.block.mesh.vertices)

    def frame_labels(self) -> list[str]:
        return [p.label for p in self.placements if p.is_frame]


# ---------------------------------------------------------------------------
# generation by group action

def _lattice_coords(G: WallpaperGroup, v: np.ndarray) -> np.ndarray:
    A = np.column_stack([G.t1, G.t2])
    return np.linalg.solve(A, v)


def generate_assembly(b: Block, G: WallpaperGroup | None = None, window: int = 1,
                      override: bool = False, frame: tuple = ()) -> Assembly:
    """Place block copies by all lifted group elements within a lattice window.

    ``window`` = k keeps elements whose translation part has lattice
    coordinates within [-k, k] (k = 1 gives the 3x3 window); window = 0 keeps
    only the identity.
    """
    if G is None:
        G = b.group
        if G is None:
            raise ProvenanceError("block carries no group; pass one explicitly")
    elif b.group is not None and not override:
        same = (G.kind == b.group.kind
                and np.allclose(G.t1, b.group.t1) and np.allclose(G.t2, b.group.t2))
        if not same:
            raise ProvenanceError("block was built for a different group "
                                  "(pass override=True to force)")
    if window == 0:
        isos = [Isometry2.identity()]
    else:
        center = b.bottom.centroid
        radius = (window + 1.5) * G.lattice_diameter() + b.bottom.diameter()
        isos = []
        for g in G.elements_near(center, radius):
            coords = _lattice_coords(G, g.translation)
            if np.abs(coords).max() <= window + 0.51:
                isos.append(g)
    keyed = sorted({g.key(): g for g in isos}.items())
    placements = tuple(Placement(lift_to_3d(g), f"g{i}", f"g{i}" in frame)
                       for i, (_, g) in enumerate(keyed))
    return Assembly(b, placements)


# ---------------------------------------------------------------------------
# the assembly property checker

@dataclass(frozen=True)
class AssemblyReport:
    violations: tuple
    samples: int
    seed: int

    @property
    def passed(self) -> bool:
        return len(self.violations) == 0

    def to_json(self) -> dict:
        return {"violations": [list(v) for v in self.violations],
                "pass": self.passed, "samples": self.samples, "seed": self.seed}


def sample_interior(mesh: TriMesh, count: int, rng: np.random.Generator,
                    tol: float = BTOL) -> np.ndarray:
    """Strictly interior points by rejection sampling in the AABB."""
    lo, hi = mesh.aabb()
    out = []
    have = 0
    for _ in range(200):
        batch = rng.uniform(lo, hi, size=(max(count, 256), 3))
        cls = points_in_mesh(mesh, batch, tol)
        inner = batch[cls == 1]
        out.append(inner)
        have += len(inner)
        if have >= count:
            break
    pts = np.vstack(out)
    if len(pts) < count:
        raise MeshTopologyError("interior sampling failed; mesh may be degenerate")
    return pts[:count]


def check_assembly(A: Assembly, samples: int = 10_000, seed: int = 0,
                   tol: float = BTOL) -> AssemblyReport:
    """Sampled interior-disjointness check over all nearby placement pairs.

    For each ordered pair of AABB-overlapping placements, strictly interior
    points of the first copy are tested against the second; any point strictly
    inside both copies is a violation.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples per block")
    mesh = A.block.mesh
    n = len(A.placements)
    rng = np.random.default_rng(seed)
    local = sample_interior(mesh, samples, rng, tol)

    corners = _aabb_corners(mesh)
    boxes = []
    for p in A.placements:
        world = p.iso(corners)
        boxes.append((world.min(axis=0), world.max(axis=0)))

    violations = []
    for i, j in itertools.product(range(n), range(n)):
        if i == j:
            continue
        lo_i, hi_i = boxes[i]
        lo_j, hi_j = boxes[j]
        if (lo_i > hi_j + tol).any() or (lo_j > hi_i + tol).any():
            continue
        gi, gj = A.placements[i].iso, A.placements[j].iso
        rel = gj.inverse().compose(gi)
        pts_j = rel(local)
        cls = points_in_mesh(mesh, pts_j, tol)
        bad = int((cls == 1).sum())
        if bad:
            violations.append((i, j, bad))
    return AssemblyReport(tuple(violations), samples, seed)


def _aabb_corners(mesh: TriMesh) -> np.ndarray:
    lo, hi = mesh.aabb()
    return np.array([[x, y, z] for x in (lo[0], hi[0])
                     for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])


# ---------------------------------------------------------------------------
# canonical blocks

VERSATILE_VERTICES = np.array([
    (0.0, 0.0, 0.0), (1.0, 1.0, 0.0), (2.0, 0.0, 0.0), (1.0, -1.0, 0.0),
    (0.0, 1.0, 1.0), (1.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, -1.0, 1.0),
    (0.0, -1.0, 1.0)])

VERSATILE_FACES_1BASED = [
    [1, 2, 3], [1, 2, 5], [1, 3, 4], [1, 4, 9], [1, 5, 9], [2, 3, 7], [2, 5, 6],
    [2, 6, 7], [3, 4, 7], [4, 7, 8], [4, 8, 9], [5, 6, 7], [5, 7, 9], [7, 8, 9]]

RHOMBLOCK_VERTICES = np.array([
    (0.0, 0.0, 0.0), (0.5, SQ3 / 2, 0.0), (1.0, 0.0, 0.0), (0.5, -SQ3 / 2, 0.0),
    (0.0, 0.0, RHOMBLOCK_HEIGHT), (0.5, SQ3 / 6, RHOMBLOCK_HEIGHT),
    (1.0, 0.0, RHOMBLOCK_HEIGHT), (1.0, -SQ3 / 3, RHOMBLOCK_HEIGHT),
    (0.5, -SQ3 / 2, RHOMBLOCK_HEIGHT), (0.0, -SQ3 / 3, RHOMBLOCK_HEIGHT)])

RHOMBLOCK_FACES_1BASED = [
    [1, 2, 3], [1, 3, 4], [1, 5, 6], [1, 2, 6], [2, 3, 6], [3, 6, 7], [3, 7, 8],
    [3, 4, 8], [4, 8, 9], [4, 9, 10], [1, 4, 10], [1, 5, 10], [5, 6, 7],
    [5, 9, 10], [7, 8, 9], [5, 7, 9]]


def _canonical_block(verts, faces_1based, bottom_ring, top_ring, c, group) -> Block:
    faces = np.array(faces_1based, dtype=np.int64) - 1
    mesh = orient_consistently(TriMesh(verts, faces))
    audit = audit_mesh(mesh)
    if not audit.ok:
        raise MeshTopologyError(f"canonical block failed audit: {audit}")
    dom = FundamentalDomain(bottom_ring, group)
    return Block(bottom=dom, top_ring=np.asarray(top_ring, dtype=float), c=c,
                 mesh=mesh, group=group, field=None, extensions=(), slicer=None)


def versatile_group_p1() -> WallpaperGroup:
    return make_group("p1", t1=(1.0, -1.0), t2=(1.0, 1.0))


def canonical_versatile() -> Block:
    """The nine-vertex block with a diamond bottom and a domino top."""
    bottom = np.array([(0.0, 0.0), (1.0, -1.0), (2.0, 0.0), (1.0, 1.0)])
    top = np.array([(0.0, -1.0), (1.0, -1.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    return _canonical_block(VERSATILE_VERTICES, VERSATILE_FACES_1BASED,
                            bottom, top, 1.0, versatile_group_p1())


def rhomblock_group_p1() -> WallpaperGroup:
    return make_group("p1", t1=(0.5, -SQ3 / 2), t2=(0.5, SQ3 / 2))


def canonical_rhomblock() -> Block:
    """The ten-vertex block with a lozenge bottom and a hexagon top."""
    bottom = np.array([(0.0, 0.0), (0.5, -SQ3 / 2), (1.0, 0.0), (0.5, SQ3 / 2)])
    top = np.array([(0.0, 0.0), (0.5, SQ3 / 6), (1.0, 0.0), (1.0, -SQ3 / 3),
                    (0.5, -SQ3 / 2), (0.0, -SQ3 / 3)])
    return _canonical_block(RHOMBLOCK_VERTICES, RHOMBLOCK_FACES_1BASED,
                            bottom, top, RHOMBLOCK_HEIGHT, rhomblock_group_p1())


def constructed_versatile() -> Block:
    """The same solid as canonical_versatile, built through the full pipeline."""
    from .blocks import build_block
    G, F, pairing, spec = versatile_construction("p4-limit")
    return build_block(F, pairing, spec, 1.0)


def constructed_rhomblock() -> Block:
    from .blocks import build_block
    G, F, pairing, spec = versatile_construction("p3-limit")
    return build_block(F, pairing, spec, RHOMBLOCK_HEIGHT)


# ---------------------------------------------------------------------------
# block symmetries and two-block contacts

def block_symmetries(b: Block, tol: float = 1e-7) -> list[Isometry3]:
    """Rigid or reflecting isometries mapping the block's vertex set to itself.

    Brute force over anchor-triple correspondences; fine at table scale.
    """
    V = np.unique(np.round(b.mesh.vertices, 9), axis=0)
    n = len(V)
    c = V.mean(axis=0)
    # anchor: three affinely independent points
    anchor = None
    for tri in itertools.combinations(range(n), 3):
        m = V[list(tri)] - c
        if np.linalg.norm(np.cross(m[1] - m[0], m[2] - m[0])) > tol:
            anchor = list(tri)
            break
    if anchor is None:
        return [Isometry3.identity()]
    a0, a1, a2 = (V[k] for k in anchor)
    d01, d02, d12 = (np.linalg.norm(a0 - a1), np.linalg.norm(a0 - a2),
                     np.linalg.norm(a1 - a2))
    out = []
    keys = set()
    for p0, p1, p2 in itertools.permutations(range(n), 3):
        if abs(np.linalg.norm(V[p0] - V[p1]) - d01) > tol:
            continue
        if abs(np.linalg.norm(V[p0] - V[p2]) - d02) > tol:
            continue
        if abs(np.linalg.norm(V[p1] - V[p2]) - d12) > tol:
            continue
        for g in _isometries_from_triples((a0, a1, a2), (V[p0], V[p1], V[p2])):
            img = g(V)
            if _vertex_sets_equal(img, V, tol):
                k = g.key(1e-6)
                if k not in keys:
                    keys.add(k)
                    out.append(g)
    return out


def _isometries_from_triples(src, dst) -> list[Isometry3]:
    """The up-to-two isometries mapping one point triple onto another.

    A triple only fixes the map up to reflection through its plane, so both
    normal-sign choices are returned when orthogonal.
    """
    s0, s1, s2 = (np.asarray(p, dtype=float) for p in src)
    t0, t1, t2 = (np.asarray(p, dtype=float) for p in dst)
    u1, u2 = s1 - s0, s2 - s0
    u3 = np.cross(u1, u2)
    v1, v2 = t1 - t0, t2 - t0
    v3 = np.cross(v1, v2)
    U = np.column_stack([u1, u2, u3])
    if abs(np.linalg.det(U)) < 1e-12:
        return []
    out = []
    for sign in (1.0, -1.0):
        Vm = np.column_stack([v1, v2, sign * v3])
        M = Vm @ np.linalg.inv(U)
        if np.abs(M.T @ M - np.eye(3)).max() < 1e-6:
            # re-orthonormalize to kill accumulated error
            q, r = np.linalg.qr(M)
            M = q @ np.diag(np.sign(np.diag(r)))
            out.append(Isometry3(M, t0 - M @ s0))
    return out


def _vertex_sets_equal(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    if len(a) != len(b):
        return False
    used = np.zeros(len(b), dtype=bool)
    for p in a:
        d = np.linalg.norm(b - p, axis=1)
        d[used] = np.inf
        k = int(np.argmin(d))
        if d[k] > tol:
            return False
        used[k] = True
    return True


@dataclass(frozen=True, eq=False)
class ContactClass:
    """Relative placement of a second block copy, canonical under the block's
    symmetries and copy swap."""

    iso: Isometry3
    key: tuple


def _tilted_faces(b: Block, tol: float = 1e-9):
    """(points, outward normal) of faces that are neither caps nor walls."""
    out = []
    for tri in b.mesh.face_points():
        n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        ln = np.linalg.norm(n)
        if ln <= tol:
            continue
        n = n / ln
        if abs(n[2]) > tol and abs(abs(n[2]) - 1.0) > tol:
            out.append((tri, n))
    return out


def enumerate_two_block_contacts(b: Block, samples: int = 2000,
                                 seed: int = 0) -> list[ContactClass]:
    """Ways to lay a second copy so an inclined face meets a declined face.

    Candidate isometries map a declined face of the moving copy onto an
    inclined face of the fixed copy (and vice versa), reversing the outward
    normal; candidates that interpenetrate are dropped and the rest are
    reduced modulo the block's symmetry group and copy swap.
    """
    faces = _tilted_faces(b)
    inclined = [(t, n) for t, n in faces if n[2] > 0]
    declined = [(t, n) for t, n in faces if n[2] < 0]
    syms = block_symmetries(b)

    candidates: dict[tuple, Isometry3] = {}
    for (ta, na), (tb, nb) in itertools.chain(
            itertools.product(inclined, declined),
            itertools.product(declined, inclined)):
        for perm in ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (2, 1, 0), (1, 0, 2)):
            src = [tb[k] for k in perm]
            for g in _isometries_from_triples(src, tuple(ta)):
                if np.linalg.det(g.linear) < 0:
                    continue  # physical copies move rigidly
                if float((g.linear @ nb) @ na) > -0.5:
                    continue  # normals must oppose across the contact
                if g.approx_eq(Isometry3.identity()):
                    continue
                candidates[g.key(1e-6)] = g

    rng = np.random.default_rng(seed)
    local = sample_interior(b.mesh, samples, rng)
    valid = []
    for g in candidates.values():
        pts = g(local)
        if (points_in_mesh(b.mesh, pts) == 1).any():
            continue
        inv = g.inverse()
        if (points_in_mesh(b.mesh, inv(local)) == 1).any():
            continue
        valid.append(g)

    classes: dict[tuple, Isometry3] = {}
    for g in valid:
        orbit = []
        for s1, s2 in itertools.product(syms, syms):
            for h in (s1.compose(g).compose(s2), s1.compose(g.inverse()).compose(s2)):
                orbit.append(h.key(1e-6))
        rep = min(orbit)
        if rep not in classes:
            classes[rep] = g
    return [ContactClass(g, k) for k, g in sorted(classes.items())]


def contact_assembly(b: Block, contact: ContactClass) -> Assembly:
    return Assembly(b, (Placement(Isometry3.identity(), "a"),
                        Placement(contact.iso, "b")))


# ---------------------------------------------------------------------------
# integer-coordinate check

def integer_coordinates_check(A: Assembly, tol: float = 1e-9) -> bool:
    """True when every placed vertex lies on the integer lattice."""
    for k in range(len(A.placements)):
        pts = A.placed_vertices(k)
        if np.abs(pts - np.round(pts)).max() > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# combinatorial placements: Truchet and lozenge assemblies

_STATE_CORNER_ANGLE = {1: 0.0, 3: -90.0, 2: 180.0, 0: 90.0}
# state W keeps the canonical block; rotating clockwise by 90 about the
# diamond centre sends the west corner to north, etc.


def truchet_tile_center(i: int, j: int) -> np.ndarray:
    return np.array([1.0 + i + j, float(j - i)])


def assembly_from_truchet(T: TruchetTiling, block: Block | None = None) -> Assembly:
    """One Versatile-Block copy per Truchet tile.

    The tile's state picks the quarter-turn about the diamond centre; the top
    dominoes tile the upper plane exactly when the colouring rule holds.
    """
    b = block if block is not None else canonical_versatile()
    placements = []
    for i in range(T.n):
        for j in range(T.m):
            state = int(T.states[i, j])
            ang = _STATE_CORNER_ANGLE[state]
            rot = Isometry2.rotation(ang, center=(1.0, 0.0))
            tr = Isometry2.translation_by(truchet_tile_center(i, j) - (1.0, 0.0))
            g = tr.compose(rot)
            placements.append(Placement(lift_to_3d(g), f"t{i}_{j}"))
    return Assembly(b, tuple(placements))


def assembly_from_lozenge(V: LozengeTiling | VersaTileTiling,
                          block: Block | None = None) -> Assembly:
    """One RhomBlock copy per lozenge; a bare tiling uses the down colouring."""
    vt = V if isinstance(V, VersaTileTiling) else VersaTileTiling(V, "D")
    b = block if block is not None else canonical_rhomblock()
    placements = []
    for k, (ang, tr) in enumerate(vt.placements_2d()):
        g = Isometry2.translation_by(tr).compose(Isometry2.rotation(ang))
        placements.append(Placement(lift_to_3d(g), f"l{k}"))
    return Assembly(b, tuple(placements))


# the three plane-symmetric Versatile assemblies (translations / glide / quarter turns)
def versatile_assembly(pattern: str, n: int = 4, m: int = 4) -> Assembly:
    from .tilings import truchet_checker, truchet_stripes, truchet_uniform
    if pattern == "p1":
        t = truchet_uniform(n, m)
    elif pattern == "pg":
        t = truchet_stripes(n, m)
    elif pattern == "p4":
        t = truchet_checker(n, m)
    else:
        raise ValueError(f"unknown Versatile assembly pattern {pattern!r}")
    return assembly_from_truchet(t)
