"""Triangulated 3D blocks between a fundamental domain and its deformation.

The side surface follows the tilted/vertical triangle pattern: per deformed
edge (v1, v2) with lifted intermediate p' the faces are {v1, v2, p'},
{v1, p', v1'} and {v2, v2', p'}.  Degenerate identifications (equal
intermediate points, intermediates landing on vertices) are welded; coplanar
opposite face pairs that overlap are split so that zero-volume membranes
appear as exactly coincident face pairs, which ``cleanup_closure`` removes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .domains import EdgePairing, FundamentalDomain
from .escher import DeformationSpec, InterpolationField, PLPath, approx_curve, interpolate_boundary
from .geom import (BTOL, EPS, GeometryError, clip_halfplane, dedup_ring, ensure_ccw,
                   ring_hausdorff, signed_area, triangulate_ring_indices)
from .wallpaper import Isometry2, Isometry3, WallpaperGroup

WELD_TOL = 1e-9


class MeshTopologyError(ValueError):
    pass


class InvalidGrowthError(ValueError):
    pass


class ContainmentError(ValueError):
    pass


# ---------------------------------------------------------------------------
# mesh core

@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        f = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def face_points(self) -> np.ndarray:
        return self.vertices[self.faces]

    def transform(self, g: Isometry3) -> "TriMesh":
        return TriMesh(g(self.vertices), self.faces.copy())

    def translate(self, v) -> "TriMesh":
        return TriMesh(self.vertices + np.asarray(v, dtype=float), self.faces.copy())

    def flipped(self) -> "TriMesh":
        return TriMesh(self.vertices.copy(), self.faces[:, ::-1].copy())

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


class VertexPool:
    """Epsilon-welding vertex store with a spatial hash."""

    def __init__(self, tol: float = WELD_TOL):
        self.tol = tol
        self.cell = 10 * tol
        self.points: list[np.ndarray] = []
        self.buckets: dict[tuple, list[int]] = {}

    def add(self, p) -> int:
        p = np.asarray(p, dtype=float).reshape(3)
        c = tuple(int(round(x / self.cell)) for x in p)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    for idx in self.buckets.get((c[0] + dx, c[1] + dy, c[2] + dz), ()):
                        if np.linalg.norm(self.points[idx] - p) <= self.tol:
                            return idx
        idx = len(self.points)
        self.points.append(p)
        self.buckets.setdefault(c, []).append(idx)
        return idx

    def array(self) -> np.ndarray:
        return np.array(self.points) if self.points else np.zeros((0, 3))


def _face_normal(pts: np.ndarray) -> np.ndarray:
    return np.cross(pts[1] - pts[0], pts[2] - pts[0])


def _drop_degenerate(vertices: np.ndarray, faces: list) -> list:
    out = []
    for f in faces:
        a, b, c = f
        if a == b or b == c or a == c:
            continue
        n = _face_normal(vertices[list(f)])
        if np.linalg.norm(n) <= EPS:
            continue
        out.append(tuple(f))
    return out


def mesh_from(pool: VertexPool, faces: list) -> TriMesh:
    verts = pool.array()
    faces = _drop_degenerate(verts, faces)
    return compact_mesh(TriMesh(verts, np.array(faces, dtype=np.int64).reshape(-1, 3)))


def compact_mesh(mesh: TriMesh) -> TriMesh:
    """Drop unreferenced vertices, reindexing faces."""
    if mesh.n_faces == 0:
        return TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    used = np.unique(mesh.faces.ravel())
    remap = -np.ones(mesh.n_vertices, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return TriMesh(mesh.vertices[used], remap[mesh.faces])


# ---------------------------------------------------------------------------
# audit / volume

@dataclass(frozen=True)
class MeshAudit:
    n_vertices: int
    n_edges: int
    n_faces: int
    euler: int
    closed: bool
    oriented: bool
    volume: float

    @property
    def ok(self) -> bool:
        return self.closed and self.oriented and self.euler == 2 and self.volume > 0

    def to_json(self) -> dict:
        return {"v": self.n_vertices, "e": self.n_edges, "f": self.n_faces,
                "euler": self.euler, "closed": self.closed,
                "oriented": self.oriented, "volume": self.volume}


def audit_mesh(mesh: TriMesh) -> MeshAudit:
    """Closedness, orientability and Euler characteristic of a triangle mesh.

    Closed and consistently oriented means every directed edge appears exactly
    once and so does its reverse.
    """
    directed: dict[tuple, int] = {}
    und: set = set()
    for a, b, c in mesh.faces:
        for u, v in ((a, b), (b, c), (c, a)):
            directed[(int(u), int(v))] = directed.get((int(u), int(v)), 0) + 1
            und.add((min(int(u), int(v)), max(int(u), int(v))))
    closed = all(cnt == 1 and directed.get((v, u), 0) == 1
                 for (u, v), cnt in directed.items())
    oriented = all(cnt == 1 for cnt in directed.values())
    used = np.unique(mesh.faces.ravel()) if mesh.n_faces else np.zeros(0, dtype=np.int64)
    euler = int(len(used) - len(und) + mesh.n_faces)
    vol = signed_mesh_volume(mesh)
    return MeshAudit(len(used), len(und), mesh.n_faces, euler, closed, oriented, vol)


def signed_mesh_volume(mesh: TriMesh) -> float:
    pts = mesh.face_points()
    return float(np.einsum("ij,ij->", pts[:, 0], np.cross(pts[:, 1], pts[:, 2]))) / 6.0


def volume(mesh: TriMesh) -> float:
    """Divergence-theorem volume of a closed oriented mesh."""
    audit = audit_mesh(mesh)
    if not audit.closed:
        raise MeshTopologyError("volume of an open mesh is undefined")
    return abs(signed_mesh_volume(mesh))


def oriented_outward(mesh: TriMesh) -> TriMesh:
    return mesh if signed_mesh_volume(mesh) >= 0 else mesh.flipped()


def orient_consistently(mesh: TriMesh) -> TriMesh:
    """Flip faces until neighbours disagree on every shared edge, then point
    the orientation outward.  Works on connected closed surfaces."""
    faces = [list(map(int, f)) for f in mesh.faces]
    by_edge: dict[tuple, list[int]] = {}
    for k, (a, b, c) in enumerate(faces):
        for u, v in ((a, b), (b, c), (c, a)):
            by_edge.setdefault((min(u, v), max(u, v)), []).append(k)
    fixed = {0}
    queue = [0]
    while queue:
        k = queue.pop()
        a, b, c = faces[k]
        for u, v in ((a, b), (b, c), (c, a)):
            for nb in by_edge[(min(u, v), max(u, v))]:
                if nb in fixed or nb == k:
                    continue
                na, nb_, nc = faces[nb]
                directed = {(na, nb_), (nb_, nc), (nc, na)}
                if (u, v) in directed:  # same direction: neighbour must flip
                    faces[nb] = [na, nc, nb_]
                fixed.add(nb)
                queue.append(nb)
    out = TriMesh(mesh.vertices, np.array(faces, dtype=np.int64))
    return oriented_outward(out)


# ---------------------------------------------------------------------------
# point-in-mesh tests (vectorized)

def mesh_surface_distance(mesh: TriMesh, pts: np.ndarray) -> np.ndarray:
    """Distance from each point to the closest mesh triangle."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 3)
    tri = mesh.face_points()
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    best = np.full(len(pts), np.inf)
    for i in range(len(tri)):
        best = np.minimum(best, _point_triangle_distance(pts, a[i], b[i], c[i]))
    return best


def _point_triangle_distance(p: np.ndarray, a, b, c) -> np.ndarray:
    ab, ac, ap = b - a, c - a, p - a
    d1 = ap @ ab
    d2 = ap @ ac
    n = np.cross(ab, ac)
    nn = float(n @ n)
    if nn <= EPS * EPS:
        # degenerate triangle: treat as segment
        return _point_segment_distance3(p, a, b)
    # barycentric projection
    dot11, dot12, dot22 = float(ab @ ab), float(ab @ ac), float(ac @ ac)
    denom = dot11 * dot22 - dot12 * dot12
    v = (dot22 * d1 - dot12 * d2) / denom
    w = (dot11 * d2 - dot12 * d1) / denom
    inside = (v >= 0) & (w >= 0) & (v + w <= 1)
    dist_plane = np.abs(ap @ (n / math.sqrt(nn)))
    d_ab = _point_segment_distance3(p, a, b)
    d_ac = _point_segment_distance3(p, a, c)
    d_bc = _point_segment_distance3(p, b, c)
    edge = np.minimum(d_ab, np.minimum(d_ac, d_bc))
    return np.where(inside, dist_plane, edge)


def _point_segment_distance3(p: np.ndarray, a, b) -> np.ndarray:
    d = b - a
    l2 = float(d @ d)
    if l2 <= EPS * EPS:
        return np.linalg.norm(p - a, axis=1)
    t = np.clip((p - a) @ d / l2, 0.0, 1.0)
    return np.linalg.norm(a + t[:, None] * d - p, axis=1)


_RAY_DIR = np.array([0.577350269189626, 0.211324865405187, 0.788675134594813])
_RAY_DIR = _RAY_DIR / np.linalg.norm(_RAY_DIR)


def points_in_mesh(mesh: TriMesh, pts: np.ndarray, tol: float = BTOL) -> np.ndarray:
    """+1 strictly inside, 0 within tol of the surface, -1 outside.

    Ray-parity along a fixed irrational direction; coincident opposite face
    pairs (zero-volume membranes) cancel in parity as both are crossed.
    """
    pts = np.asarray(pts, dtype=float).reshape(-1, 3)
    dist = mesh_surface_distance(mesh, pts)
    tri = mesh.face_points()
    count = np.zeros(len(pts), dtype=int)
    d = _RAY_DIR
    for i in range(len(tri)):
        a, b, c = tri[i]
        e1, e2 = b - a, c - a
        pvec = np.cross(d, e2)
        det = float(e1 @ pvec)
        if abs(det) <= 1e-14:
            continue
        inv = 1.0 / det
        tvec = pts - a
        u = (tvec @ pvec) * inv
        qvec = np.cross(tvec, e1)
        v = (qvec @ d) * inv
        t = (qvec @ e2) * inv
        hit = (u >= -1e-12) & (v >= -1e-12) & (u + v <= 1 + 1e-12) & (t > tol)
        count += hit
    inside = (count % 2) == 1
    out = np.where(inside, 1, -1)
    out[dist <= tol] = 0
    return out


# ---------------------------------------------------------------------------
# coplanar overlap handling (the vanishing-membrane artifact)

def _plane_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = n / np.linalg.norm(n)
    ref = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(n, ref)
    u /= np.linalg.norm(u)
    return u, np.cross(n, u)


def _convex_difference_2d(tri: np.ndarray, hole: np.ndarray) -> list[np.ndarray]:
    """Convex pieces tiling tri minus hole (both ccw convex polygons)."""
    pieces = []
    remaining = tri
    m = len(hole)
    for k in range(m):
        a, b = hole[k], hole[(k + 1) % m]
        d = b - a
        n_in = np.array([-d[1], d[0]])  # inward normal of the ccw hole edge
        # piece outside this hole edge, inside all previous halfplanes
        piece = clip_halfplane(remaining, n_in, float(n_in @ a))
        if len(piece) >= 3 and abs(signed_area(piece)) > EPS:
            pieces.append(piece)
        remaining = clip_halfplane(remaining, -n_in, float(-n_in @ a))
        if len(remaining) == 0:
            break
    return pieces


def _convex_intersection_2d(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    out = p
    m = len(q)
    for k in range(m):
        a, b = q[k], q[(k + 1) % m]
        d = b - a
        n_out = np.array([d[1], -d[0]])  # outward normal of ccw edge
        out = clip_halfplane(out, n_out, float(n_out @ a))
        if len(out) == 0:
            return out
    return out


def split_opposite_overlaps(pool: VertexPool, faces: list) -> list:
    """Split partially overlapping coplanar opposite face pairs.

    The overlap region is re-emitted as an exactly coincident face pair with
    opposite orientations, so the raw mesh exhibits the zero-volume membrane
    explicitly and cleanup can cancel it.
    """
    verts = pool.array()
    changed = True
    guard = 0
    while changed:
        guard += 1
        if guard > 20:
            raise MeshTopologyError("overlap splitting failed to stabilize")
        changed = False
        verts = pool.array()
        nfaces = len(faces)
        for i in range(nfaces):
            if changed:
                break
            fi = faces[i]
            pi = verts[list(fi)]
            ni = _face_normal(pi)
            li = np.linalg.norm(ni)
            if li <= EPS:
                continue
            for j in range(i + 1, nfaces):
                fj = faces[j]
                pj = verts[list(fj)]
                nj = _face_normal(pj)
                lj = np.linalg.norm(nj)
                if lj <= EPS:
                    continue
                if np.linalg.norm(np.cross(ni / li, nj / lj)) > 1e-9:
                    continue
                if float((ni / li) @ (nj / lj)) > 0:
                    continue  # same orientation: not a membrane candidate
                if abs(float((pj[0] - pi[0]) @ (ni / li))) > BTOL:
                    continue
                if set(fi) == set(fj):
                    continue  # exactly coincident: cleanup's job
                u, w = _plane_basis(ni)
                origin = pi[0]
                qi = np.array([[(p - origin) @ u, (p - origin) @ w] for p in pi])
                qj = np.array([[(p - origin) @ u, (p - origin) @ w] for p in pj])
                qi2, qj2 = ensure_ccw(qi), ensure_ccw(qj)
                overlap = _convex_intersection_2d(qi2, qj2)
                if len(overlap) < 3 or abs(signed_area(overlap)) <= 1e-12:
                    continue

                def lift(poly2):
                    return [origin + x * u + y * w for x, y in poly2]

                def emit(poly2, normal_like):
                    idxs = [pool.add(p) for p in lift(poly2)]
                    tris = []
                    for k in range(1, len(idxs) - 1):
                        t = (idxs[0], idxs[k], idxs[k + 1])
                        pts3 = pool.array()[list(t)]
                        nrm = _face_normal(pts3)
                        if np.linalg.norm(nrm) <= EPS:
                            continue
                        if float(nrm @ normal_like) < 0:
                            t = (t[0], t[2], t[1])
                        tris.append(t)
                    return tris

                new_faces = []
                new_faces.extend(emit(overlap, ni))
                new_faces.extend(emit(overlap, nj))
                for piece in _convex_difference_2d(qi2, overlap):
                    new_faces.extend(emit(piece, ni))
                for piece in _convex_difference_2d(qj2, overlap):
                    new_faces.extend(emit(piece, nj))
                faces = [f for k, f in enumerate(faces) if k not in (i, j)] + new_faces
                changed = True
                break
    return faces


def repair_t_junctions(pool: VertexPool, faces: list) -> list:
    """Subdivide face edges that pass through other pool vertices."""
    verts = pool.array()
    tol = WELD_TOL * 10
    changed = True
    guard = 0
    while changed:
        guard += 1
        if guard > 60:
            raise MeshTopologyError("t-junction repair failed to stabilize")
        changed = False
        out = []
        for f in faces:
            a, b, c = f
            split = None
            for (u, v), opp in (((a, b), c), ((b, c), a), ((c, a), b)):
                pu, pv = verts[u], verts[v]
                d = pv - pu
                l2 = float(d @ d)
                if l2 <= EPS * EPS:
                    continue
                lo = np.minimum(pu, pv) - tol
                hi = np.maximum(pu, pv) + tol
                cand = np.nonzero(((verts >= lo) & (verts <= hi)).all(axis=1))[0]
                if len(cand) == 0:
                    continue
                t = (verts[cand] - pu) @ d / l2
                on = (t > 1e-9) & (t < 1 - 1e-9)
                if not on.any():
                    continue
                proj = pu + t[:, None] * d
                near = np.linalg.norm(proj - verts[cand], axis=1) <= tol
                hits = cand[on & near]
                hits = [int(x) for x in hits if int(x) not in (u, v, opp)]
                if hits:
                    # the hit closest to u keeps the subdivision deterministic
                    x = min(hits, key=lambda k: float((verts[k] - pu) @ d / l2))
                    split = (u, v, opp, x)
                    break
            if split:
                u, v, opp, x = split
                out.append((u, x, opp))
                out.append((x, v, opp))
                changed = True
            else:
                out.append(tuple(f))
        faces = out
    return faces


def cleanup_closure(mesh: TriMesh) -> TriMesh:
    """Remove zero-volume membranes: coincident face pairs with opposite
    orientation, then unreferenced vertices."""
    keyed: dict[tuple, list[int]] = {}
    for k, f in enumerate(mesh.faces):
        keyed.setdefault(tuple(sorted(map(int, f))), []).append(k)
    def par(f):
        f = [int(x) for x in f]
        base = sorted(f)
        perm = [base.index(x) for x in f]
        return 1 if perm in ([0, 1, 2], [1, 2, 0], [2, 0, 1]) else -1

    drop: set[int] = set()
    for key, idxs in keyed.items():
        if len(idxs) < 2:
            continue
        pos = [k for k in idxs if par(mesh.faces[k]) > 0]
        neg = [k for k in idxs if par(mesh.faces[k]) < 0]
        m = min(len(pos), len(neg))
        drop.update(pos[:m])
        drop.update(neg[:m])
        if len(pos) - m > 1 or len(neg) - m > 1:
            raise MeshTopologyError("same-orientation duplicate faces")
    keep = [k for k in range(mesh.n_faces) if k not in drop]
    return compact_mesh(TriMesh(mesh.vertices, mesh.faces[keep]))


# ---------------------------------------------------------------------------
# block construction

@dataclass(frozen=True, eq=False)
class Block:
    bottom: FundamentalDomain
    top_ring: np.ndarray
    c: float
    mesh: TriMesh
    group: WallpaperGroup | None = None
    field: InterpolationField | None = None
    extensions: tuple = ()
    slicer: object = None  # callable z -> boundary ring

    @property
    def height(self) -> float:
        return self.c

    def slice(self, z: float) -> np.ndarray:
        return slice_block(self, z)

    def with_mesh(self, mesh: TriMesh) -> "Block":
        return replace(self, mesh=mesh)


def _edge_chain_indices(pool: VertexPool, field: InterpolationField, c: float):
    """Per edge: bottom endpoints and the lifted top chain (path at z=1)."""
    dom = field.domain
    n = len(dom)
    vb = [pool.add((*dom.vertices[i], 0.0)) for i in range(n)]
    vt = [pool.add((*dom.vertices[i], c)) for i in range(n)]
    chains = []
    for i in range(n):
        pts = field.paths[i].points
        chain = [vt[i]]
        for p in pts[1:-1]:
            chain.append(pool.add((*p, c)))
        chain.append(vt[(i + 1) % n])
        chains.append(chain)
    return vb, vt, chains


def _side_faces(vb, chains, i, n):
    """Def-8 side faces for edge i: tilted + verticals (or a quad band)."""
    a, b = vb[i], vb[(i + 1) % n]
    chain = chains[i]
    faces = []
    if len(chain) == 2:
        faces.append((a, b, chain[1]))
        faces.append((a, chain[1], chain[0]))
    elif len(chain) == 3:
        p = chain[1]
        faces.append((a, b, p))
        faces.append((a, p, chain[0]))
        faces.append((b, chain[2], p))
    else:
        # multi-point chain: fan from the bottom edge endpoints
        k = len(chain)
        s = k // 2
        for j in range(s):
            faces.append((a, chain[j + 1], chain[j]))
        faces.append((a, b, chain[s]))
        for j in range(s, k - 1):
            faces.append((b, chain[j + 1], chain[j]))
    return faces


def build_block(F: FundamentalDomain, pairing: EdgePairing, spec: DeformationSpec,
                c: float, cleanup: bool = True) -> Block:
    """Block between F (bottom) and its deformation F' (top) at height c.

    The raw mesh keeps zero-volume membranes as coincident opposite face
    pairs; pass cleanup=False to inspect them, the default removes them.
    """
    if c <= 0:
        raise ValueError("height must be positive")
    field = InterpolationField.build(pairing, spec)
    dom = field.domain
    n = len(dom)
    pool = VertexPool()
    vb, vt, chains = _edge_chain_indices(pool, field, c)

    faces: list = []
    for i in range(n):
        faces.extend(_side_faces(vb, chains, i, n))

    # bottom cap, downward
    for (ia, ib, ic) in triangulate_ring_indices(dom.vertices):
        faces.append((vb[ia], vb[ic], vb[ib]))
    # top cap, upward: ring of chain vertices in boundary order
    top_idx = []
    for i in range(n):
        top_idx.extend(chains[i][:-1])
    seen = []
    ring_idx = []
    for idx in top_idx:
        if not ring_idx or idx != ring_idx[-1]:
            ring_idx.append(idx)
    if len(ring_idx) > 1 and ring_idx[0] == ring_idx[-1]:
        ring_idx.pop()
    top_pts = pool.array()[ring_idx][:, :2]
    for (ia, ib, ic) in triangulate_ring_indices(top_pts):
        faces.append((ring_idx[ia], ring_idx[ib], ring_idx[ic]))

    faces = _drop_degenerate(pool.array(), faces)
    faces = split_opposite_overlaps(pool, faces)
    faces = repair_t_junctions(pool, faces)
    mesh = oriented_outward(mesh_from(pool, faces))
    if cleanup:
        mesh = cleanup_closure(mesh)
        audit = audit_mesh(mesh)
        if not (audit.closed and audit.oriented):
            raise MeshTopologyError(f"block mesh failed audit: {audit}")

    top_ring = interpolate_boundary(field, 1.0)
    slicer = _field_slicer(field, c)
    return Block(bottom=dom, top_ring=top_ring, c=c, mesh=mesh, group=dom.group,
                 field=field, extensions=(), slicer=slicer)


def _field_slicer(field: InterpolationField, c: float):
    def slicer(z: float) -> np.ndarray:
        return interpolate_boundary(field, z / c)
    return slicer


def slice_block(b: Block, z: float) -> np.ndarray:
    """Boundary polygon of the block at height z (0 <= z <= c)."""
    if z < -EPS or z > b.c + EPS:
        raise ValueError(f"slice height {z} outside [0, {b.c}]")
    z = min(max(z, 0.0), b.c)
    if b.slicer is not None:
        return b.slicer(z)
    rings = mesh_section(b.mesh, z)
    if not rings:
        raise MeshTopologyError("no cross-section at this height")
    return max(rings, key=lambda r: abs(signed_area(r)))


def mesh_section(mesh: TriMesh, z: float, tol: float = 1e-9) -> list[np.ndarray]:
    """Cross-section rings of the mesh with the plane x3 = z."""
    segs = []
    for tri in mesh.face_points():
        zs = tri[:, 2] - z
        pts = []
        for i in range(3):
            a, b = tri[i], tri[(i + 1) % 3]
            za, zb = zs[i], zs[(i + 1) % 3]
            if abs(za) <= tol:
                pts.append(a[:2])
            if (za < -tol and zb > tol) or (za > tol and zb < -tol):
                t = za / (za - zb)
                pts.append((a + t * (b - a))[:2])
        uniq = []
        for p in pts:
            if not any(np.linalg.norm(p - q) <= tol for q in uniq):
                uniq.append(p)
        if len(uniq) == 2:
            segs.append((uniq[0], uniq[1]))
    if not segs:
        return []
    # chain segments into rings
    rings = []
    unused = list(range(len(segs)))
    while unused:
        i = unused.pop()
        chain = [segs[i][0], segs[i][1]]
        extended = True
        while extended:
            extended = False
            for k in list(unused):
                a, b = segs[k]
                if np.linalg.norm(chain[-1] - a) <= 10 * tol:
                    chain.append(b)
                    unused.remove(k)
                    extended = True
                elif np.linalg.norm(chain[-1] - b) <= 10 * tol:
                    chain.append(a)
                    unused.remove(k)
                    extended = True
                if extended:
                    break
        if np.linalg.norm(chain[0] - chain[-1]) <= 10 * tol and len(chain) > 3:
            rings.append(dedup_ring(np.array(chain[:-1])))
    return rings


# ---------------------------------------------------------------------------
# extensions: flip / mirror / iterate / growth / shrink

def flip_block(b: Block) -> Block:
    """Reflect through the mid-plane: bottom and top swap roles."""
    verts = b.mesh.vertices.copy()
    verts[:, 2] = b.c - verts[:, 2]
    mesh = oriented_outward(TriMesh(verts, b.mesh.faces[:, ::-1].copy()))
    base_slicer = b.slicer

    def slicer(z):
        return base_slicer(b.c - z)

    bottom = FundamentalDomain(ensure_ccw(dedup_ring(b.top_ring)), b.group) \
        if abs(signed_area(b.top_ring)) > EPS else b.bottom
    return Block(bottom=bottom, top_ring=b.bottom.vertices, c=b.c, mesh=mesh,
                 group=b.group, field=b.field,
                 extensions=b.extensions + ("flip",), slicer=slicer)


def iterate_blocks(b1: Block, b2: Block) -> Block:
    """Stack b2 on top of b1; b1's top must be congruent to b2's bottom."""
    r1 = dedup_ring(b1.top_ring)
    r2 = dedup_ring(b2.bottom.vertices if isinstance(b2.bottom, FundamentalDomain)
                    else np.asarray(b2.bottom))
    if ring_hausdorff(r1, r2) > 1e-7:
        raise ValueError("iterate: top of the first block must match bottom of the second")
    pool = VertexPool()
    faces = []
    for mesh in (b1.mesh, b2.mesh.translate((0.0, 0.0, b1.c))):
        idx = [pool.add(p) for p in mesh.vertices]
        for f in mesh.faces:
            faces.append((idx[f[0]], idx[f[1]], idx[f[2]]))
    mesh = cleanup_closure(mesh_from(pool, faces))
    mesh = oriented_outward(mesh)
    audit = audit_mesh(mesh)
    if not (audit.closed and audit.oriented):
        raise MeshTopologyError("iterate produced a non-manifold mesh; "
                                "interface caps did not cancel")
    s1, s2, c1 = b1.slicer, b2.slicer, b1.c

    def slicer(z):
        return s1(z) if z <= c1 else s2(z - c1)

    return Block(bottom=b1.bottom, top_ring=b2.top_ring, c=b1.c + b2.c, mesh=mesh,
                 group=b1.group, field=b1.field,
                 extensions=b1.extensions + ("iterate",), slicer=slicer)


def mirror_block(b: Block) -> Block:
    """Height-2c block running top-shape, base-shape, top-shape."""
    out = iterate_blocks(flip_block(b), b)
    return replace(out, extensions=b.extensions + ("mirror",))


def apply_growth(b: Block, f, layers: int = 32) -> Block:
    """Reparameterize the block along its axis by a growth function.

    The slice at height z becomes the original slice at f(z/c) * c; the mesh
    is rebuilt on a uniform z-grid.
    """
    if b.field is None:
        raise InvalidGrowthError("growth needs an interpolated block")
    ts = np.linspace(0.0, 1.0, layers + 1)
    vals = np.array([float(f(t)) for t in ts])
    if abs(vals[0]) > EPS or abs(vals[-1] - 1.0) > EPS:
        raise InvalidGrowthError("growth function must fix 0 and 1")
    if np.any(np.diff(vals) <= 0):
        raise InvalidGrowthError("growth function must be strictly increasing on the grid")
    if np.abs(vals - ts).max() <= EPS:
        return b

    field, c = b.field, b.c
    dom = field.domain
    n = len(dom)

    def ring_at(zfrac: float) -> np.ndarray:
        pts = []
        for i in range(n):
            pts.extend(field.edge_slice_points(i, zfrac))
        return np.array(pts)

    pool = VertexPool()
    layer_idx = []
    for k, t in enumerate(ts):
        ring = ring_at(float(vals[k]))
        layer_idx.append([pool.add((*p, t * c)) for p in ring])
    faces = []
    m = len(layer_idx[0])
    for k in range(layers):
        lo, hi = layer_idx[k], layer_idx[k + 1]
        for j in range(m):
            a, bb = lo[j], lo[(j + 1) % m]
            d, e = hi[j], hi[(j + 1) % m]
            faces.append((a, bb, e))
            faces.append((a, e, d))
    for (ia, ib, ic) in triangulate_ring_indices(ring_at(float(vals[0]))):
        faces.append((layer_idx[0][ia], layer_idx[0][ic], layer_idx[0][ib]))
    top_ring_pts = ring_at(float(vals[-1]))
    for (ia, ib, ic) in triangulate_ring_indices(top_ring_pts):
        faces.append((layer_idx[-1][ia], layer_idx[-1][ib], layer_idx[-1][ic]))
    faces = _drop_degenerate(pool.array(), faces)
    faces = repair_t_junctions(pool, faces)
    mesh = oriented_outward(cleanup_closure(mesh_from(pool, faces)))
    audit = audit_mesh(mesh)
    if not (audit.closed and audit.oriented):
        # layered rebuilds cannot express pinched (membrane) slices
        raise MeshTopologyError(f"growth mesh failed audit: {audit}")

    def slicer(z):
        return interpolate_boundary(field, float(f(z / c)))

    return Block(bottom=b.bottom, top_ring=b.top_ring, c=c, mesh=mesh, group=b.group,
                 field=field, extensions=b.extensions + ("growth",), slicer=slicer)


def shrink_top(b: Block, new_top) -> Block:
    """Replace the top layer's original vertices by interior points.

    ``new_top`` must have the same ring structure as the block's top: the
    intermediate-point slots must coincide, and the moved vertices must stay
    inside the original top region (degenerating to a segment is allowed).
    """
    if b.field is None:
        raise ContainmentError("shrink needs an interpolated block")
    field, c = b.field, b.c
    dom = field.domain
    n = len(dom)
    old_ring = []
    slot_is_vertex = []
    for i in range(n):
        pts = field.paths[i].points
        old_ring.append(dom.vertices[i])
        slot_is_vertex.append(True)
        for p in pts[1:-1]:
            old_ring.append(p)
            slot_is_vertex.append(False)
    old_ring = np.array(old_ring)
    new_ring = np.asarray(new_top, dtype=float)
    if new_ring.shape != old_ring.shape:
        raise ContainmentError(f"new top must have {len(old_ring)} ring vertices "
                               f"matching the block's top structure")
    from .geom import point_in_ring
    top_region = dedup_ring(b.top_ring)
    for k in range(len(old_ring)):
        if not slot_is_vertex[k]:
            if np.linalg.norm(new_ring[k] - old_ring[k]) > BTOL:
                raise ContainmentError("intermediate points must stay on the new top")
        else:
            if point_in_ring(top_region, new_ring[k]) < 0:
                raise ContainmentError(f"moved vertex {k} leaves the original top")

    if np.abs(new_ring - old_ring).max() <= EPS:
        return b

    pool = VertexPool()
    vb = [pool.add((*dom.vertices[i], 0.0)) for i in range(n)]
    # top chains with moved vertices
    chains = []
    k = 0
    ring_positions = []
    for i in range(n):
        pts = field.paths[i].points
        head = pool.add((*new_ring[k], c))
        ring_positions.append(k)
        k += 1
        chain = [head]
        for _ in pts[1:-1]:
            chain.append(pool.add((*new_ring[k], c)))
            k += 1
        chains.append(chain)
    for i in range(n):
        chains[i].append(chains[(i + 1) % n][0])
    faces = []
    for i in range(n):
        faces.extend(_side_faces(vb, chains, i, n))
    for (ia, ib, ic) in triangulate_ring_indices(dom.vertices):
        faces.append((vb[ia], vb[ic], vb[ib]))
    top_idx = []
    for i in range(n):
        top_idx.extend(chains[i][:-1])
    ring_idx = []
    for idx in top_idx:
        if not ring_idx or idx != ring_idx[-1]:
            ring_idx.append(idx)
    if len(ring_idx) > 1 and ring_idx[0] == ring_idx[-1]:
        ring_idx.pop()
    top_pts = pool.array()[ring_idx][:, :2]
    if abs(signed_area(top_pts)) > EPS:
        for (ia, ib, ic) in triangulate_ring_indices(top_pts):
            faces.append((ring_idx[ia], ring_idx[ib], ring_idx[ic]))
    faces = _drop_degenerate(pool.array(), faces)
    faces = split_opposite_overlaps(pool, faces)
    faces = repair_t_junctions(pool, faces)
    mesh = oriented_outward(cleanup_closure(mesh_from(pool, faces)))
    audit = audit_mesh(mesh)
    if not (audit.closed and audit.oriented):
        raise MeshTopologyError(f"shrunk mesh failed audit: {audit}")

    # sampled containment inside the original block
    rng = np.random.default_rng(12345)
    lo, hi = mesh.aabb()
    samples = rng.uniform(lo, hi, size=(4000, 3))
    inner = samples[points_in_mesh(mesh, samples) == 1]
    if len(inner):
        outside = points_in_mesh(b.mesh, inner) == -1
        if outside.any():
            raise ContainmentError("shrunk block is not contained in the original")
    return Block(bottom=b.bottom, top_ring=new_ring, c=c, mesh=mesh, group=b.group,
                 field=None, extensions=b.extensions + ("shrink",), slicer=None)


# ---------------------------------------------------------------------------
# iterated-approximation blocks (smooth boundary limit)

def build_approx_block(F: FundamentalDomain, pairing: EdgePairing, curves: dict,
                       N: int, a: float, c: float, validate_depth: int = 5) -> Block:
    """Block whose deformed edges approximate smooth curves stage by stage.

    ``curves`` maps representative edge indices to unit-frame curves f with
    f(0) = (0,0), f(1) = (1,0).  Layer k sits at height c*(k/N)^a and carries
    the stage-k approximant; each refinement band uses the tilted/vertical
    triangle pattern per sub-edge.
    """
    if c <= 0:
        raise ValueError("height must be positive")
    dom = pairing.domain
    n = len(dom)
    reps = pairing.representatives
    for r in curves:
        if r not in reps:
            raise ValueError(f"edge {r} is not a pairing representative")

    def edge_frame(i):
        v1, v2 = dom.edge(i)
        d = v2 - v1
        rot = np.array([[d[0], -d[1]], [d[1], d[0]]])  # scale+rotate from unit frame
        return v1, rot

    # stage chains per representative, transported to partners
    def stage_chain(i, k):
        v1, v2 = dom.edge(i)
        if i in curves or pairing.partner(i) in curves:
            rep = i if i in reps else pairing.partner(i)
            reverse = i not in reps
            f = curves.get(rep)
            if f is None:
                return np.array([v1, v2])
            pts = (approx_curve(f, N, a, k).points if k >= 1
                   else np.array([(0.0, 0.0), (1.0, 0.0)]))
            o, rot = edge_frame(rep)
            world = pts @ rot.T + o
            if reverse:
                g = pairing.iso(rep)
                world = g(world)
                w1, w2 = dom.edge(i)
                if np.linalg.norm(world[0] - w1) > BTOL:
                    world = world[::-1]
            return world
        return np.array([v1, v2])

    # validate the deepest affordable stage for non-crossing
    from .escher import check_noncrossing, DeformationSpec as DS, PLPath as PP
    k_val = min(N, validate_depth)
    entries = {}
    for r in reps:
        ch = stage_chain(r, k_val)
        entries[r] = PP(ch) if len(ch) > 2 else PP(np.array(dom.edge(r)))
    check_noncrossing(pairing, DS(entries))

    pool = VertexPool()
    heights = [c * (k / N) ** a for k in range(N + 1)]
    layer_chains = []
    for k in range(N + 1):
        chains = []
        for i in range(n):
            world = stage_chain(i, k)
            chains.append([pool.add((*p, heights[k])) for p in world])
        layer_chains.append(chains)

    faces = []
    for k in range(N):
        for i in range(n):
            lo, hi = layer_chains[k][i], layer_chains[k + 1][i]
            if len(hi) == len(lo):
                for j in range(len(lo) - 1):
                    faces.append((lo[j], lo[j + 1], hi[j + 1]))
                    faces.append((lo[j], hi[j + 1], hi[j]))
            else:
                assert len(hi) == 2 * len(lo) - 1
                for j in range(len(lo) - 1):
                    mid = hi[2 * j + 1]
                    faces.append((lo[j], lo[j + 1], mid))
                    faces.append((lo[j], mid, hi[2 * j]))
                    faces.append((lo[j + 1], hi[2 * j + 2], mid))

    bottom_ring_idx = [layer_chains[0][i][0] for i in range(n)]
    for (ia, ib, ic) in triangulate_ring_indices(dom.vertices):
        faces.append((bottom_ring_idx[ia], bottom_ring_idx[ic], bottom_ring_idx[ib]))
    top_idx = []
    for i in range(n):
        top_idx.extend(layer_chains[N][i][:-1])
    ring_idx = []
    for idx in top_idx:
        if not ring_idx or idx != ring_idx[-1]:
            ring_idx.append(idx)
    if len(ring_idx) > 1 and ring_idx[0] == ring_idx[-1]:
        ring_idx.pop()
    top_pts = pool.array()[ring_idx][:, :2]
    for (ia, ib, ic) in triangulate_ring_indices(top_pts):
        faces.append((ring_idx[ia], ring_idx[ib], ring_idx[ic]))

    faces = _drop_degenerate(pool.array(), faces)
    faces = repair_t_junctions(pool, faces)
    mesh = oriented_outward(cleanup_closure(mesh_from(pool, faces)))
    audit = audit_mesh(mesh)
    if not (audit.closed and audit.oriented and audit.euler == 2):
        raise MeshTopologyError(f"approximation block failed audit: {audit}")
    top_ring = dedup_ring(top_pts)
    return Block(bottom=dom, top_ring=top_ring, c=c, mesh=mesh, group=dom.group,
                 field=None, extensions=("approx",), slicer=None)
