"""Planar geometry primitives shared by the whole package.

Everything works on plain numpy arrays: points are shape (2,), polygons and
polylines are shape (n, 2).  Polygons are vertex rings without a repeated
closing vertex.  All comparisons use the package tolerance ``EPS`` (point
identity) or ``BTOL`` (boundary classification, 10x looser), matching the
numeric contract of the rest of the package.
"""

from __future__ import annotations

import numpy as np

# Global tolerance for point identity / orthogonality.
EPS = 1e-9
# Boundary classification tolerance (signed-distance tests).
BTOL = 10 * EPS


class GeometryError(ValueError):
    pass


def as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.shape != (2,):
        raise GeometryError(f"expected a 2-point, got shape {a.shape}")
    return a


def as_ring(pts) -> np.ndarray:
    a = np.asarray(pts, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2 or a.shape[0] < 3:
        raise GeometryError(f"expected an (n,2) ring with n >= 3, got {a.shape}")
    return a


def orient(a, b, c) -> float:
    """Twice the signed area of triangle (a, b, c); >0 means ccw."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def signed_area(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def ensure_ccw(ring: np.ndarray) -> np.ndarray:
    ring = as_ring(ring)
    return ring if signed_area(ring) >= 0 else ring[::-1].copy()


def centroid(ring: np.ndarray) -> np.ndarray:
    """Area centroid; falls back to the vertex mean for degenerate rings."""
    a = signed_area(ring)
    if abs(a) < EPS:
        return ring.mean(axis=0)
    x, y = ring[:, 0], ring[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    cx = float(np.sum((x + xn) * cross)) / (6.0 * a)
    cy = float(np.sum((y + yn) * cross)) / (6.0 * a)
    return np.array([cx, cy])


def dedup_ring(ring: np.ndarray, tol: float = EPS) -> np.ndarray:
    """Drop consecutive duplicate vertices (cyclically)."""
    keep = []
    n = len(ring)
    for i in range(n):
        if not keep or np.linalg.norm(ring[i] - ring[keep[-1]]) > tol:
            keep.append(i)
    while len(keep) > 1 and np.linalg.norm(ring[keep[-1]] - ring[keep[0]]) <= tol:
        keep.pop()
    return ring[keep]


def strip_collinear(ring: np.ndarray, tol: float = BTOL) -> np.ndarray:
    """Remove vertices lying on the segment between their neighbours."""
    ring = dedup_ring(ring)
    out = []
    n = len(ring)
    for i in range(n):
        a, b, c = ring[i - 1], ring[i], ring[(i + 1) % n]
        scale = max(np.linalg.norm(c - a), 1.0)
        if abs(orient(a, b, c)) > tol * scale:
            out.append(ring[i])
    if len(out) < 3:
        return ring
    return np.array(out)


# ---------------------------------------------------------------------------
# segments

def seg_point_distance(a, b, p) -> float:
    d = b - a
    l2 = float(d @ d)
    if l2 <= EPS * EPS:
        return float(np.linalg.norm(p - a))
    t = float(np.clip((p - a) @ d / l2, 0.0, 1.0))
    return float(np.linalg.norm(a + t * d - p))


def seg_seg_points(p, q, r, s, tol: float = EPS) -> list[np.ndarray]:
    """Intersection of segments [p,q] and [r,s] as a list of witness points.

    Transversal crossings give one point; collinear overlaps give the two
    overlap-interval endpoints.  Touching at endpoints is reported too; the
    caller decides what counts.
    """
    d1, d2 = q - p, s - r
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    scale = max(np.linalg.norm(d1), np.linalg.norm(d2), 1.0)
    if abs(denom) > tol * scale * scale:
        w = r - p
        t = (w[0] * d2[1] - w[1] * d2[0]) / denom
        u = (w[0] * d1[1] - w[1] * d1[0]) / denom
        eps_t = tol / max(np.linalg.norm(d1), tol)
        eps_u = tol / max(np.linalg.norm(d2), tol)
        if -eps_t <= t <= 1 + eps_t and -eps_u <= u <= 1 + eps_u:
            return [p + t * d1]
        return []
    # parallel: only interesting when collinear
    if abs(orient(p, q, r)) > tol * scale:
        return []
    axis = d1 if d1 @ d1 >= d2 @ d2 else d2
    l2 = float(axis @ axis)
    if l2 <= tol * tol:
        return [p.copy()] if np.linalg.norm(p - r) <= tol else []
    base, direction = p, axis / np.linalg.norm(axis)

    def s_of(x):
        return float((x - base) @ direction)

    s_lo = max(min(s_of(p), s_of(q)), min(s_of(r), s_of(s)))
    s_hi = min(max(s_of(p), s_of(q)), max(s_of(r), s_of(s)))
    if s_lo > s_hi + tol:
        return []
    out = [base + s_lo * direction]
    if s_hi - s_lo > tol:
        out.append(base + s_hi * direction)
    return out


# ---------------------------------------------------------------------------
# point in polygon

def point_ring_distance(ring: np.ndarray, p: np.ndarray) -> float:
    n = len(ring)
    return min(seg_point_distance(ring[i], ring[(i + 1) % n], p) for i in range(n))


def point_in_ring(ring: np.ndarray, p, tol: float = BTOL) -> int:
    """+1 strictly inside, 0 on the boundary (within tol), -1 outside.

    Uses even-odd ray casting, which stays correct for weakly simple rings
    (doubled boundary segments cancel in pairs).
    """
    p = as_point(p)
    if point_ring_distance(ring, p) <= tol:
        return 0
    inside = False
    n = len(ring)
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        if (a[1] > p[1]) != (b[1] > p[1]):
            xs = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if p[0] < xs:
                inside = not inside
    return 1 if inside else -1


def points_in_ring(ring: np.ndarray, pts: np.ndarray, tol: float = BTOL) -> np.ndarray:
    """Vectorized point_in_ring over an (m,2) batch; returns int array."""
    pts = np.asarray(pts, dtype=float)
    a = ring
    b = np.roll(ring, -1, axis=0)
    ax, ay = a[:, 0][None, :], a[:, 1][None, :]
    bx, by = b[:, 0][None, :], b[:, 1][None, :]
    px, py = pts[:, 0][:, None], pts[:, 1][:, None]
    # distance to each segment
    dx, dy = bx - ax, by - ay
    l2 = dx * dx + dy * dy
    l2 = np.where(l2 < EPS * EPS, 1.0, l2)
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / l2, 0.0, 1.0)
    dist2 = (ax + t * dx - px) ** 2 + (ay + t * dy - py) ** 2
    on_boundary = (dist2.min(axis=1) <= tol * tol)
    # even-odd crossings
    cond = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = ax + (py - ay) * dx / np.where(dy == 0, 1.0, dy)
    crossing = cond & (px < xs)
    inside = (crossing.sum(axis=1) % 2) == 1
    out = np.where(inside, 1, -1)
    out = np.where(on_boundary, 0, out)
    return out


# ---------------------------------------------------------------------------
# ring self-intersection (weak simplicity allowed)

def ring_is_weakly_simple(ring: np.ndarray, tol: float = EPS) -> bool:
    """True when no two edges cross transversally in their interiors.

    Shared endpoints, touching and collinear overlap are allowed; those occur
    in legitimate pinched fundamental domains.
    """
    n = len(ring)
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = ring[j], ring[(j + 1) % n]
            d1, d2 = b - a, d - c
            denom = d1[0] * d2[1] - d1[1] * d2[0]
            scale = max(np.linalg.norm(d1), np.linalg.norm(d2), 1.0)
            if abs(denom) <= tol * scale * scale:
                continue
            w = c - a
            t = (w[0] * d2[1] - w[1] * d2[0]) / denom
            u = (w[0] * d1[1] - w[1] * d1[0]) / denom
            et = tol / max(np.linalg.norm(d1), tol)
            eu = tol / max(np.linalg.norm(d2), tol)
            if et < t < 1 - et and eu < u < 1 - eu:
                return False
    return True


# ---------------------------------------------------------------------------
# triangulation

def split_pinches(ring: np.ndarray, tol: float = EPS) -> list[np.ndarray]:
    """Split a weakly simple ring at repeated vertices into simple sub-rings.

    Doubled segments and zero-area whiskers produce sub-rings with fewer than
    3 distinct vertices or vanishing area; those are dropped.
    """
    ring = dedup_ring(ring, tol)
    n = len(ring)
    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(ring[i] - ring[j]) <= tol:
                first = np.vstack([ring[:i + 1], ring[j + 1:]])
                second = ring[i:j]
                out = []
                for sub in (first, second):
                    out.extend(split_pinches(sub, tol) if len(sub) >= 3 else [])
                return out
    if abs(signed_area(ring)) <= tol:
        return []
    return [ring]


def _ear_clip_simple(ring: np.ndarray, tol: float = EPS) -> list[np.ndarray]:
    """Deterministic ear clipping of a simple ccw ring; lowest-index ear first."""
    ring = np.asarray(ring, dtype=float)
    return [ring[list(t)] for t in _ear_clip_indices(ring, list(range(len(ring))), tol)]


def triangulate_ring(ring: np.ndarray, tol: float = EPS) -> list[np.ndarray]:
    """Triangulate a (possibly weakly simple) ccw ring into ccw triangles."""
    tris: list[np.ndarray] = []
    for sub in split_pinches(np.asarray(ring, dtype=float), tol):
        sub = ensure_ccw(sub)
        tris.extend(_ear_clip_simple(sub, tol))
    return tris


def _split_pinches_idx(ring: np.ndarray, idx: list[int], tol: float) -> list[list[int]]:
    n = len(idx)
    for a in range(n):
        for b in range(a + 1, n):
            if np.linalg.norm(ring[idx[a]] - ring[idx[b]]) <= tol:
                first = idx[:a + 1] + idx[b + 1:]
                second = idx[a:b]
                out = []
                for sub in (first, second):
                    if len(sub) >= 3:
                        out.extend(_split_pinches_idx(ring, sub, tol))
                return out
    if abs(signed_area(ring[idx])) <= tol:
        return []
    return [idx]


def _ear_clip_indices(ring: np.ndarray, idx: list[int], tol: float) -> list[tuple]:
    """Ears of a simple sub-ring given by indices; lowest index preferred.

    Containment tests only consider reflex vertices and count strict-interior
    hits, so points resting exactly on an ear's boundary do not block it.
    """
    work = list(idx)
    if signed_area(ring[work]) < 0:
        work = work[::-1]

    def is_reflex(i: int) -> bool:
        n = len(work)
        a, b, c = ring[work[i - 1]], ring[work[i]], ring[work[(i + 1) % n]]
        return orient(a, b, c) < 0

    tris: list[tuple] = []
    guard = 0
    while len(work) > 3:
        guard += 1
        if guard > 100000:
            raise GeometryError("ear clipping failed to terminate")
        n = len(work)
        clipped = False
        # vertices within tol of their neighbours' chord vanish silently; the
        # mesh layer reinstates them by edge subdivision where needed
        for i in range(n):
            a, b, c = ring[work[i - 1]], ring[work[i]], ring[work[(i + 1) % n]]
            chord = np.linalg.norm(c - a)
            if chord <= tol or abs(orient(a, b, c)) <= tol * chord:
                del work[i]
                clipped = True
                break
        if clipped:
            continue
        reflex = [k for k in range(n) if is_reflex(k)]
        # prefer ears no point touches at all; only when deadlocked accept
        # ears whose blockers sit within tolerance of the ear boundary
        for delta_scale in (1e-14, tol):
            for i in range(n):
                ia, ib, ic = work[i - 1], work[i], work[(i + 1) % n]
                a, b, c = ring[ia], ring[ib], ring[ic]
                if orient(a, b, c) <= 0:
                    continue
                scale = max(np.linalg.norm(c - a), np.linalg.norm(b - a), tol)
                delta = delta_scale * scale
                ok = True
                for k in reflex:
                    if work[k] in (ia, ib, ic):
                        continue
                    p = ring[work[k]]
                    if (orient(a, b, p) > delta and orient(b, c, p) > delta
                            and orient(c, a, p) > delta):
                        ok = False
                        break
                if ok:
                    tris.append((ia, ib, ic))
                    del work[i]
                    clipped = True
                    break
            if clipped:
                break
        if not clipped:
            raise GeometryError("no ear found; ring is not simple enough")
    if len(work) == 3:
        a, b, c = (ring[j] for j in work)
        if abs(orient(a, b, c)) > tol:
            tris.append(tuple(work))
    return tris


def triangulate_ring_indices(ring: np.ndarray, tol: float = EPS) -> list[tuple]:
    """Triangulate a weakly simple ring, returning ccw index triples.

    Pinches (repeated vertices) split the ring; doubled segments and
    whiskers produce no triangles.  Orientation of each emitted triple is ccw
    regardless of sub-ring traversal direction.
    """
    ring = np.asarray(ring, dtype=float)
    subs = _split_pinches_idx(ring, list(range(len(ring))), tol)
    tris: list[tuple] = []
    for sub in subs:
        tris.extend(_ear_clip_indices(ring, sub, tol))
    return tris


# ---------------------------------------------------------------------------
# convex clipping (used by the Dirichlet construction)

def clip_halfplane(poly: np.ndarray, n: np.ndarray, d: float, tol: float = EPS) -> np.ndarray:
    """Clip a convex ccw polygon against the half-plane n.x <= d."""
    if len(poly) == 0:
        return poly
    out = []
    m = len(poly)
    for i in range(m):
        a, b = poly[i], poly[(i + 1) % m]
        fa, fb = float(n @ a - d), float(n @ b - d)
        if fa <= tol:
            out.append(a)
        if (fa < -tol and fb > tol) or (fa > tol and fb < -tol):
            t = fa / (fa - fb)
            out.append(a + t * (b - a))
    if not out:
        return np.zeros((0, 2))
    return dedup_ring(np.array(out))


# ---------------------------------------------------------------------------
# distances between polylines / rings

def polyline_point_distance(path: np.ndarray, p: np.ndarray) -> float:
    return min(seg_point_distance(path[i], path[i + 1], p) for i in range(len(path) - 1))


def ring_hausdorff(r1: np.ndarray, r2: np.ndarray, samples_per_edge: int = 16) -> float:
    """Symmetric Hausdorff distance between two rings, by dense edge sampling."""
    def sample(ring):
        pts = []
        n = len(ring)
        ts = np.linspace(0.0, 1.0, samples_per_edge, endpoint=False)
        for i in range(n):
            a, b = ring[i], ring[(i + 1) % n]
            pts.extend(a + t * (b - a) for t in ts)
        return np.array(pts)

    closed1 = np.vstack([r1, r1[:1]])
    closed2 = np.vstack([r2, r2[:1]])
    d12 = max(polyline_point_distance(closed2, p) for p in sample(r1))
    d21 = max(polyline_point_distance(closed1, p) for p in sample(r2))
    return max(d12, d21)
