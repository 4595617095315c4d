"""Piecewise linear paths, the crossing predicate, the Escher Trick, boundary
interpolation, curve approximation, and the VersaTile symmetry recipe."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domains import EdgePairing, FundamentalDomain
from .geom import (BTOL, EPS, dedup_ring, polyline_point_distance, ring_hausdorff,
                   seg_seg_points)
from .wallpaper import Isometry2, WallpaperGroup, make_group


class PathError(ValueError):
    pass


class CrossingError(ValueError):
    def __init__(self, pair: tuple, location):
        self.pair = pair
        self.location = None if location is None else np.asarray(location, dtype=float)
        loc = "" if location is None else f" near {np.round(self.location, 6).tolist()}"
        super().__init__(f"deformation paths for edges {pair[0]} and {pair[1]} cross{loc}")


@dataclass(frozen=True)
class PLPath:
    """Piecewise linear path with the recursive-halving parameterization."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise PathError("a path needs at least two 2-points")
        if any(np.linalg.norm(pts[i + 1] - pts[i]) <= EPS for i in range(len(pts) - 1)):
            raise PathError("consecutive path points must be distinct")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def reversed(self) -> "PLPath":
        return PLPath(self.points[::-1].copy())

    def transform(self, g: Isometry2) -> "PLPath":
        return PLPath(g(self.points))

    def eval(self, t: float) -> np.ndarray:
        return eval_path(self, t)

    def segments(self):
        return [(self.points[i], self.points[i + 1]) for i in range(len(self.points) - 1)]


def eval_path(path, t: float) -> np.ndarray:
    """Evaluate the recursive halving parameterization (not arc length).

    gamma_{v1..vn}(t) runs gamma_{v1..v(n-1)} on [0, 1/2] and the last segment
    on [1/2, 1].
    """
    pts = path.points if isinstance(path, PLPath) else np.asarray(path, dtype=float)
    if t < -EPS or t > 1 + EPS:
        raise PathError(f"parameter {t} outside [0, 1]")
    t = min(max(t, 0.0), 1.0)
    n = len(pts)
    if n == 2:
        return pts[0] + t * (pts[1] - pts[0])
    if t <= 0.5:
        return eval_path(pts[:-1], 2.0 * t)
    return pts[-2] + (2.0 * (t - 0.5)) * (pts[-1] - pts[-2])


# ---------------------------------------------------------------------------
# crossing predicate (three-point paths)

def _shared_interior_point(a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray | None:
    """A point shared by both polylines that is an endpoint of neither path."""
    ends_a = (a[0], a[-1])
    ends_b = (b[0], b[-1])
    for i in range(len(a) - 1):
        for j in range(len(b) - 1):
            for w in seg_seg_points(a[i], a[i + 1], b[j], b[j + 1], tol):
                if any(np.linalg.norm(w - e) <= tol for e in ends_a):
                    continue
                if any(np.linalg.norm(w - e) <= tol for e in ends_b):
                    continue
                return w
    return None


def _wedge_both_sides(tip_path: np.ndarray, other: np.ndarray, tol: float) -> bool:
    """Does ``other`` have points strictly inside and strictly outside the open
    wedge spanned at tip_path's middle point by its two arms?

    Falls back to a line-sidedness test when the three points are collinear.
    """
    v1, p, v2 = tip_path
    u, w = v1 - p, v2 - p
    det = u[0] * w[1] - u[1] * w[0]
    scale = max(np.linalg.norm(u), np.linalg.norm(w), 1.0)
    if abs(det) <= tol * scale * scale:
        # degenerate wedge: both sides of the segment's line
        d = v2 - v1
        nrm = np.array([-d[1], d[0]])
        nrm /= np.linalg.norm(nrm)
        vals = (other - v1) @ nrm
        return bool((vals > tol).any() and (vals < -tol).any())
    minv = np.linalg.inv(np.column_stack([u, w]))
    delta = tol * float(np.abs(minv).sum(axis=1).max())
    coords = (other - p) @ minv.T  # rows of (a, b)
    inside = False
    outside = False
    for k in range(len(coords) - 1):
        a0, b0 = coords[k]
        a1, b1 = coords[k + 1]
        # interval on [0,1] where a(s) > delta
        lo, hi = 0.0, 1.0
        for c0, c1 in ((a0, a1), (b0, b1)):
            if abs(c1 - c0) <= 1e-300:
                if c0 <= delta:
                    lo, hi = 1.0, 0.0
                continue
            s_star = (delta - c0) / (c1 - c0)
            if c1 > c0:
                lo = max(lo, s_star)
            else:
                hi = min(hi, s_star)
        if lo < hi:
            inside = True
        if min(a0, a1) < -delta or min(b0, b1) < -delta:
            outside = True
        if inside and outside:
            return True
    return inside and outside


def paths_cross(a, b, tol: float = BTOL) -> bool:
    """Crossing test for two 3-point piecewise linear paths.

    True when the paths share a point other than their endpoints and each path
    reaches strictly both sides of the other's wedge; one-sided contact
    (touching) is not a crossing.  Symmetric by construction.
    """
    pa = a.points if isinstance(a, PLPath) else np.asarray(a, dtype=float)
    pb = b.points if isinstance(b, PLPath) else np.asarray(b, dtype=float)
    if len(pa) != 3 or len(pb) != 3:
        raise PathError("paths_cross expects exactly three points per path")
    for pts in (pa, pb):
        if (np.linalg.norm(pts[1] - pts[0]) <= EPS
                or np.linalg.norm(pts[2] - pts[1]) <= EPS):
            raise PathError("degenerate zero-length path segment")
    if _shared_interior_point(pa, pb, tol) is None:
        return False
    return _wedge_both_sides(pa, pb, tol) and _wedge_both_sides(pb, pa, tol)


# ---------------------------------------------------------------------------
# crossing test for general polylines (iterated Escher)

def _side_near(polyline: np.ndarray, p: np.ndarray) -> float:
    """Signed side of p relative to the nearest segment of the polyline."""
    best, best_val = np.inf, 0.0
    for i in range(len(polyline) - 1):
        a, b = polyline[i], polyline[i + 1]
        d = b - a
        l2 = float(d @ d)
        if l2 <= EPS * EPS:
            continue
        t = float(np.clip((p - a) @ d / l2, 0.0, 1.0))
        q = a + t * d
        dist = float(np.linalg.norm(p - q))
        if dist < best:
            best = dist
            best_val = float(d[0] * (p[1] - a[1]) - d[1] * (p[0] - a[0])) / math.sqrt(l2)
    return best_val


def polylines_cross(a, b, tol: float = BTOL) -> bool:
    """Crossing test for polylines with any number of points.

    Pairwise segment checks: a transversal interior-interior intersection is a
    crossing; contact chains (touching vertices, collinear overlaps) cross only
    when the other path changes side across the contact.  Contacts through a
    path endpoint count as touching.
    """
    pa = a.points if isinstance(a, PLPath) else np.asarray(a, dtype=float)
    pb = b.points if isinstance(b, PLPath) else np.asarray(b, dtype=float)
    lo_a, hi_a = pa.min(axis=0), pa.max(axis=0)
    lo_b, hi_b = pb.min(axis=0), pb.max(axis=0)
    if (lo_a > hi_b + tol).any() or (lo_b > hi_a + tol).any():
        return False

    ends_a = (pa[0], pa[-1])
    ends_b = (pb[0], pb[-1])

    def is_end(p, ends):
        return any(np.linalg.norm(p - e) <= tol for e in ends)

    # transversal interior-interior crossings
    for i in range(len(pa) - 1):
        p, q = pa[i], pa[i + 1]
        for j in range(len(pb) - 1):
            r, s = pb[j], pb[j + 1]
            d1, d2 = q - p, s - r
            denom = d1[0] * d2[1] - d1[1] * d2[0]
            scale = max(np.linalg.norm(d1), np.linalg.norm(d2), 1.0)
            if abs(denom) <= tol * scale * scale:
                continue
            w0 = r - p
            t = (w0[0] * d2[1] - w0[1] * d2[0]) / denom
            u = (w0[0] * d1[1] - w0[1] * d1[0]) / denom
            et = tol / max(np.linalg.norm(d1), tol)
            eu = tol / max(np.linalg.norm(d2), tol)
            if et < t < 1 - et and eu < u < 1 - eu:
                x = p + t * d1
                if not is_end(x, ends_a) and not is_end(x, ends_b):
                    return True

    # contact chains: where does b touch a, and does it change side there?
    witnesses = []
    for i in range(len(pa) - 1):
        for j in range(len(pb) - 1):
            witnesses.extend(seg_seg_points(pa[i], pa[i + 1], pb[j], pb[j + 1], tol))
    contacts = []
    for w in witnesses:
        if is_end(w, ends_a) or is_end(w, ends_b):
            continue
        if not any(np.linalg.norm(w - c) <= tol for c in contacts):
            contacts.append(w)
    if not contacts:
        return False

    seglen = np.linalg.norm(np.diff(pb, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seglen)])
    total = float(cum[-1])

    def point_at(s: float) -> np.ndarray:
        s = min(max(s, 0.0), total)
        j = int(np.searchsorted(cum, s, side="right")) - 1
        j = min(max(j, 0), len(pb) - 2)
        frac = (s - cum[j]) / max(seglen[j], EPS)
        return pb[j] + frac * (pb[j + 1] - pb[j])

    def arc_of(w: np.ndarray) -> float:
        best_s, best_d = 0.0, np.inf
        for j in range(len(pb) - 1):
            d = pb[j + 1] - pb[j]
            l2 = float(d @ d)
            t = float(np.clip((w - pb[j]) @ d / max(l2, EPS * EPS), 0.0, 1.0))
            dist = float(np.linalg.norm(pb[j] + t * d - w))
            if dist < best_d:
                best_d, best_s = dist, float(cum[j] + t * seglen[j])
        return best_s

    step = max(total / 200.0, 10 * tol)
    for w in contacts:
        s_w = arc_of(w)
        before = after = None
        s = s_w
        while s - step > tol:
            s -= step
            p = point_at(s)
            if polyline_point_distance(pa, p) > 3 * tol:
                before = p
                break
        s_lo = s
        s = s_w
        while s + step < total - tol:
            s += step
            p = point_at(s)
            if polyline_point_distance(pa, p) > 3 * tol:
                after = p
                break
        s_hi = s
        if before is None or after is None:
            continue  # contact runs into an endpoint of b: touching
        # sliding past an endpoint of a and wrapping around it is not a crossing
        near_a_end = False
        for s_chk in np.linspace(s_lo, s_hi, 9):
            p = point_at(float(s_chk))
            if any(np.linalg.norm(p - e) <= 4 * tol for e in ends_a):
                near_a_end = True
                break
        if near_a_end:
            continue
        s0, s1 = _side_near(pa, before), _side_near(pa, after)
        if s0 * s1 < 0 and abs(s0) > tol and abs(s1) > tol:
            return True
    return False


# ---------------------------------------------------------------------------
# deformation specs and the Escher Trick

@dataclass(frozen=True)
class DeformationSpec:
    """Per representative edge, either a single intermediate point (3-point
    path) or a full path whose endpoints match the edge."""

    entries: dict = field(default_factory=dict)

    @staticmethod
    def from_intermediates(points: dict) -> "DeformationSpec":
        return DeformationSpec({int(k): np.asarray(v, dtype=float) for k, v in points.items()})

    def path_for(self, rep: int, v1: np.ndarray, v2: np.ndarray) -> PLPath:
        entry = self.entries[rep]
        if isinstance(entry, PLPath):
            path = entry
        else:
            arr = np.asarray(entry, dtype=float)
            if arr.ndim == 1:
                mid = arr
                if (np.linalg.norm(mid - v1) <= EPS or np.linalg.norm(mid - v2) <= EPS):
                    raise PathError(f"intermediate point of edge {rep} coincides with an endpoint")
                path = PLPath(np.array([v1, mid, v2]))
            else:
                path = PLPath(arr)
        if np.linalg.norm(path.start - v1) > BTOL or np.linalg.norm(path.end - v2) > BTOL:
            if np.linalg.norm(path.start - v2) <= BTOL and np.linalg.norm(path.end - v1) <= BTOL:
                path = path.reversed()
            else:
                raise PathError(f"path endpoints for edge {rep} do not match the edge")
        return path

    def to_json(self) -> dict:
        edges = []
        for rep in sorted(self.entries):
            entry = self.entries[rep]
            if isinstance(entry, PLPath):
                edges.append({"rep": rep, "path": entry.points.tolist()})
            else:
                arr = np.asarray(entry, dtype=float)
                if arr.ndim == 1:
                    edges.append({"rep": rep, "intermediate": arr.tolist()})
                else:
                    edges.append({"rep": rep, "path": arr.tolist()})
        return {"edges": edges}

    @staticmethod
    def from_json(obj) -> "DeformationSpec":
        entries = {}
        for e in obj["edges"]:
            rep = int(e["rep"])
            if "intermediate" in e:
                entries[rep] = np.asarray(e["intermediate"], dtype=float)
            elif "path" in e:
                entries[rep] = PLPath(np.asarray(e["path"], dtype=float))
            else:
                raise PathError("deformation entry needs 'intermediate' or 'path'")
        return DeformationSpec(entries)


def resolve_edge_paths(pairing: EdgePairing, spec: DeformationSpec) -> list[PLPath]:
    """One path per edge of the (refined) domain: representative paths from the
    spec, partner paths transported by the pairing isometries."""
    domain = pairing.domain
    reps = pairing.representatives
    missing = [r for r in reps if r not in spec.entries]
    extra = [r for r in spec.entries if r not in reps]
    if missing or extra:
        raise PathError(f"spec does not match pairing representatives "
                        f"(missing {missing}, extra {extra})")
    paths: dict[int, PLPath] = {}
    for i, j, g in pairing.pairs:
        v1, v2 = domain.edge(i)
        path_i = spec.path_for(i, v1, v2)
        paths[i] = path_i
        w1, w2 = domain.edge(j)
        image = path_i.transform(g)
        if np.linalg.norm(image.start - w1) <= BTOL and np.linalg.norm(image.end - w2) <= BTOL:
            paths[j] = image
        elif np.linalg.norm(image.start - w2) <= BTOL and np.linalg.norm(image.end - w1) <= BTOL:
            paths[j] = image.reversed()
        else:  # pragma: no cover
            raise PathError(f"pairing isometry does not map edge {i} onto edge {j}")
    return [paths[i] for i in range(len(domain))]


def _paths_conflict(a: PLPath, b: PLPath, tol: float = BTOL) -> bool:
    if len(a) == 3 and len(b) == 3:
        return paths_cross(a, b, tol)
    return polylines_cross(a, b, tol)


def _same_path(a: PLPath, b: PLPath, tol: float = EPS) -> bool:
    if len(a) != len(b):
        return False
    fwd = np.abs(a.points - b.points).max() <= tol
    rev = np.abs(a.points - b.points[::-1]).max() <= tol
    return bool(fwd or rev)


def check_noncrossing(pairing: EdgePairing, spec: DeformationSpec) -> list[PLPath]:
    """Validate the non-crossing condition over a 2-cell orbit window.

    Returns the resolved per-edge paths on success; raises CrossingError with
    the offending pair and a shared-point location otherwise.
    """
    domain = pairing.domain
    G = domain.group
    paths = resolve_edge_paths(pairing, spec)
    window = 2.0 * G.lattice_diameter() + domain.diameter()
    elements = G.elements_near(domain.centroid, window)
    images: list[tuple[int, PLPath]] = []
    for g in elements:
        for r in pairing.representatives:
            images.append((r, paths[r].transform(g)))
    for i, base in enumerate(paths):
        blo, bhi = base.points.min(axis=0), base.points.max(axis=0)
        for r, img in images:
            ilo, ihi = img.points.min(axis=0), img.points.max(axis=0)
            if (ilo > bhi + BTOL).any() or (blo > ihi + BTOL).any():
                continue
            if _same_path(base, img):
                continue
            if _paths_conflict(base, img):
                w = _shared_interior_point(base.points, img.points, BTOL)
                raise CrossingError((i, r), w)
    return paths


def escher_deform(F: FundamentalDomain, pairing: EdgePairing,
                  spec: DeformationSpec) -> FundamentalDomain:
    """Replace each paired edge by its deformation path, yielding a new
    fundamental domain whose boundary concatenates the paths."""
    domain = pairing.domain
    if F is not None and abs(F.area - domain.area) > 1e-9:
        raise ValueError("pairing does not belong to this domain")
    paths = check_noncrossing(pairing, spec)
    ring = []
    for i, path in enumerate(paths):
        ring.extend(path.points[:-1])
    ring = dedup_ring(np.array(ring))
    return FundamentalDomain(ring, domain.group)


# ---------------------------------------------------------------------------
# interpolation between F and F'

@dataclass(frozen=True)
class InterpolationField:
    """Per-edge interpolation between a domain boundary and its deformation."""

    domain: FundamentalDomain
    paths: tuple

    @staticmethod
    def build(pairing: EdgePairing, spec: DeformationSpec) -> "InterpolationField":
        return InterpolationField(pairing.domain, tuple(check_noncrossing(pairing, spec)))

    def edge_slice_points(self, i: int, z: float) -> np.ndarray:
        """Vertex chain of edge i's path at interpolation parameter z
        (excluding the terminal vertex)."""
        v1, v2 = self.domain.edge(i)
        pts = self.paths[i].points
        if len(pts) == 2:
            return np.array([v1])
        inner = pts[1:-1]
        n_in = len(inner)
        if n_in == 1:
            moved = [v1 + z * (inner[0] - v1), v2 + z * (inner[0] - v2)]
        else:
            # halving parameters of interior vertices give their base points
            ts = [_halving_parameter(len(pts), j) for j in range(1, len(pts) - 1)]
            moved = [(v1 + t * (v2 - v1)) + z * (q - (v1 + t * (v2 - v1)))
                     for t, q in zip(ts, inner)]
        return np.vstack([[v1], moved])


def _halving_parameter(npts: int, j: int) -> float:
    """Parameter of vertex j under the recursive halving parameterization."""
    # vertex n-1 sits at t=1; walking backwards halves the parameter space
    t = 1.0
    for _ in range(npts - 1 - j):
        t *= 0.5
    return t if j > 0 else 0.0


def gamma_three_point(v1, p, v2, z: float, t: float) -> np.ndarray:
    """The explicit three-branch interpolation map for a 3-point path."""
    v1, p, v2 = (np.asarray(q, dtype=float) for q in (v1, p, v2))
    if not (0.0 <= z <= 1.0 and 0.0 <= t <= 1.0):
        raise PathError("gamma parameters outside the unit square")
    if z <= EPS:
        return v1 + t * (v2 - v1)
    if z >= 1.0 - EPS:
        return v1 + 2 * t * (p - v1) if t <= 0.5 else p + (2 * t - 1) * (v2 - p)
    if t <= z / 2:
        return v1 + (2 * t / z) * z * (p - v1)
    if t <= 1 - z / 2:
        return z * (p - v1) + v1 + ((t - z / 2) / (1 - z)) * (z * (v1 - v2) + v2 - v1)
    return z * (p - v2) + v2 - ((t - (1 - z / 2)) * 2 / z) * z * (p - v2)


def interpolate_boundary(field: InterpolationField, z: float) -> np.ndarray:
    """Closed boundary ring at interpolation parameter z in [0, 1]."""
    if z < -EPS or z > 1 + EPS:
        raise PathError(f"interpolation parameter {z} outside [0, 1]")
    z = min(max(z, 0.0), 1.0)
    ring = []
    for i in range(len(field.domain)):
        ring.extend(field.edge_slice_points(i, z))
    return dedup_ring(np.array(ring))


# ---------------------------------------------------------------------------
# curve approximation (iterated Escher)

def approx_curve(f, N: int, a: float, n: int) -> PLPath:
    """Piecewise linear approximant of stage n out of N with damping exponent a.

    Interior points are the curve samples at i / 2^n, pulled toward the chord
    by the factor (n/N)^a.
    """
    if not (1 <= n <= N):
        raise PathError("stage must satisfy 1 <= n <= N")
    if n > 20:
        raise PathError("stage depth beyond 2^20 subdivision points is not supported")
    if a < 1:
        raise PathError("exponent must be >= 1")
    f0, f1 = np.asarray(f(0.0), dtype=float), np.asarray(f(1.0), dtype=float)
    if np.linalg.norm(f0 - (0.0, 0.0)) > EPS or np.linalg.norm(f1 - (1.0, 0.0)) > EPS:
        raise PathError("curve must run from (0,0) to (1,0)")
    scale = (n / N) ** a
    pts = [f0]
    for i in range(1, 2 ** n):
        t = i / 2 ** n
        base = np.array([t, 0.0])
        pts.append(scale * (np.asarray(f(t), dtype=float) - base) + base)
    pts.append(f1)
    return PLPath(np.array(pts))


def sup_distance_to_curve(path: PLPath, f, samples: int = 1000) -> float:
    """Supremum over dense samples of distance from f to the path's image."""
    ts = np.linspace(0.0, 1.0, samples)
    return max(polyline_point_distance(path.points, np.asarray(f(t), dtype=float)) for t in ts)


# ---------------------------------------------------------------------------
# VersaTile construction

VERSATILE_KINDS = ("p4-limit", "p3-limit")


def versatile_rhombus(kind, alpha: float | None = None):
    """Rhombus domain and its p1 group for the VersaTile construction.

    The two limit cases use the side lengths of the canonical blocks; the
    generic case takes the rhombus angle alpha (radians).
    """
    if kind == "p4-limit":
        verts = np.array([(0.0, 0.0), (1.0, -1.0), (2.0, 0.0), (1.0, 1.0)])
    elif kind == "p3-limit":
        s3 = math.sqrt(3)
        verts = np.array([(0.0, 0.0), (0.5, -s3 / 2), (1.0, 0.0), (0.5, s3 / 2)])
    else:
        if alpha is None or not (0 < alpha < math.pi):
            raise PathError("generic VersaTile needs an angle alpha in (0, pi)")
        h = math.cos(alpha / 2), math.sin(alpha / 2)
        verts = np.array([(0.0, 0.0), (h[0], -h[1]), (2 * h[0], 0.0), (h[0], h[1])])
    G = make_group("p1", t1=verts[1] - verts[0], t2=verts[3] - verts[0])
    return G, FundamentalDomain(verts, G)


def _mirror_across_bisector(v1, v2, pts):
    mid = (v1 + v2) / 2.0
    d = (v2 - v1) / np.linalg.norm(v2 - v1)
    out = []
    for p in pts:
        w = p - mid
        out.append(mid + w - 2.0 * float(w @ d) * d)
    return np.array(out)


def versatile_boundary(segment, kind, alpha: float | None = None) -> DeformationSpec:
    """Deformation spec for the rhombus domain per the VersaTile recipe.

    The free segment runs from the rhombus origin to the perpendicular
    bisector of the first edge; it is mirrored to complete that edge's path
    (first condition) and the second edge's path is derived per kind: the
    p4 limit reverses a quarter turn about the shared vertex, the p3 limit
    rotates by 120 degrees about the adjacent threefold centre.  The
    remaining edges follow by the p1 translations of the pairing.
    """
    G, F = versatile_rhombus(kind, alpha)
    v1, v2 = F.edge(0)
    _, v3 = F.edge(1)
    seg = np.asarray(segment.points if isinstance(segment, PLPath) else segment, dtype=float)
    if np.linalg.norm(seg[0] - v1) > BTOL:
        raise PathError("segment must start at the rhombus origin vertex")
    mid = (v1 + v2) / 2.0
    d = (v2 - v1) / np.linalg.norm(v2 - v1)
    if abs(float((seg[-1] - mid) @ d)) > BTOL:
        raise PathError("segment must end on the perpendicular bisector of edge 0")
    half_len = float((mid - v1) @ d)
    for p in seg:
        along = float((p - v1) @ d)
        if along < -BTOL or along > half_len + BTOL:
            raise PathError("segment leaves the designated half-edge region")

    mirrored = _mirror_across_bisector(v1, v2, seg)[::-1]
    joined = np.vstack([seg, mirrored])
    gamma1 = PLPath(_dedup_chain(joined))

    if kind == "p4-limit":
        rot = Isometry2.rotation(-90.0, center=v2)
        gamma2 = gamma1.transform(rot).reversed()
    elif kind == "p3-limit":
        c = (v1 + v2 + v3) / 3.0
        gamma2 = gamma1.transform(Isometry2.rotation(120.0, center=c))
    else:
        gamma2 = PLPath(np.array([v2, v3]))
    return DeformationSpec({0: gamma1, 1: gamma2})


def _dedup_chain(pts, tol: float = EPS):
    out = [pts[0]]
    for p in pts[1:]:
        if np.linalg.norm(p - out[-1]) > tol:
            out.append(p)
    return np.array(out)


def versatile_construction(kind, segment=None, alpha: float | None = None):
    """Group, domain, pairing and spec for a VersaTile in one call."""
    from .domains import edge_pairing
    G, F = versatile_rhombus(kind, alpha)
    if segment is None:
        v1, v2 = F.edge(0)
        if kind == "p4-limit":
            segment = np.array([v1, (0.0, -1.0)])
        elif kind == "p3-limit":
            segment = np.array([v1, (0.0, -math.sqrt(3) / 3)])
        else:
            mid = (v1 + v2) / 2.0
            segment = np.array([v1, mid])
    pairing = edge_pairing(F)
    spec = versatile_boundary(segment, kind, alpha)
    return G, F, pairing, spec


# ---------------------------------------------------------------------------
# randomized specs for property tests

def random_spec(pairing: EdgePairing, rng: np.random.Generator,
                amplitude: float = 0.22, tries: int = 40) -> DeformationSpec:
    """A valid random single-intermediate deformation for every representative.

    Rejection-samples intermediate offsets until the non-crossing check
    passes; shrinks the amplitude on failure so termination is guaranteed
    (midpoints always succeed).
    """
    domain = pairing.domain
    reps = pairing.representatives
    amp = amplitude
    for attempt in range(tries):
        entries = {}
        for r in reps:
            v1, v2 = domain.edge(r)
            d = v2 - v1
            nrm = np.array([-d[1], d[0]])
            mid = (v1 + v2) / 2.0
            off = rng.uniform(-amp, amp) * nrm + rng.uniform(-amp / 2, amp / 2) * d
            entries[r] = mid + off
        spec = DeformationSpec.from_intermediates(entries)
        try:
            check_noncrossing(pairing, spec)
            return spec
        except (CrossingError, PathError):
            amp *= 0.7
    # midpoints deform nothing and always validate
    entries = {r: (domain.edge(r)[0] + domain.edge(r)[1]) / 2.0 for r in reps}
    spec = DeformationSpec.from_intermediates(entries)
    check_noncrossing(pairing, spec)
    return spec


def deformation_equals_domain(F: FundamentalDomain, Fp: FundamentalDomain,
                              tol: float = 1e-7) -> bool:
    return ring_hausdorff(F.vertices, Fp.vertices) <= tol
