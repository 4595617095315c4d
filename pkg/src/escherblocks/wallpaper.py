"""Line-free wallpaper groups: generators, planar action, orbits, 3D lift.

Supported kinds are the seven types whose action fixes no line (p1, p2, pg,
p2gg, p3, p4, p6).  Group elements are rigid planar motions ``x -> R x + v``
carried together with a generator word for reproducibility.  Everything is
immutable after construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geom import EPS

SUPPORTED_KINDS = ("p1", "p2", "pg", "p2gg", "p3", "p4", "p6")

POINT_GROUP_ORDER = {"p1": 1, "p2": 2, "pg": 2, "p2gg": 4, "p3": 3, "p4": 4, "p6": 6}

ITERATION_CAP = 10 ** 6


class UnsupportedGroupError(ValueError):
    pass


class InvalidLatticeError(ValueError):
    pass


class IterationLimitError(RuntimeError):
    pass


def _rot(deg: float) -> np.ndarray:
    a = math.radians(deg)
    return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])


@dataclass(frozen=True)
class Isometry2:
    """Rigid planar motion x -> linear @ x + translation."""

    linear: np.ndarray
    translation: np.ndarray
    word: str = "e"

    def __post_init__(self):
        m = np.asarray(self.linear, dtype=float).reshape(2, 2)
        t = np.asarray(self.translation, dtype=float).reshape(2)
        object.__setattr__(self, "linear", m)
        object.__setattr__(self, "translation", t)
        if np.abs(m.T @ m - np.eye(2)).max() > 1e-7:
            raise ValueError("linear part is not orthogonal")

    @staticmethod
    def identity() -> "Isometry2":
        return Isometry2(np.eye(2), np.zeros(2), "e")

    @staticmethod
    def translation_by(v, word: str = "t") -> "Isometry2":
        return Isometry2(np.eye(2), np.asarray(v, dtype=float), word)

    @staticmethod
    def rotation(deg: float, center=(0.0, 0.0), word: str = "r") -> "Isometry2":
        c = np.asarray(center, dtype=float)
        m = _rot(deg)
        return Isometry2(m, c - m @ c, word)

    @staticmethod
    def reflection_x(word: str = "m") -> "Isometry2":
        return Isometry2(np.diag([1.0, -1.0]), np.zeros(2), word)

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.linear @ x + self.translation
        return x @ self.linear.T + self.translation

    __call__ = apply

    def compose(self, other: "Isometry2") -> "Isometry2":
        """self after other: (self*other)(x) = self(other(x))."""
        return Isometry2(self.linear @ other.linear,
                         self.linear @ other.translation + self.translation,
                         f"{self.word}*{other.word}")

    def inverse(self) -> "Isometry2":
        rinv = self.linear.T
        return Isometry2(rinv, -rinv @ self.translation, f"({self.word})^-1")

    def is_identity(self, tol: float = EPS) -> bool:
        return (np.abs(self.linear - np.eye(2)).max() <= tol
                and np.abs(self.translation).max() <= tol)

    def approx_eq(self, other: "Isometry2", tol: float = EPS) -> bool:
        return (np.abs(self.linear - other.linear).max() <= tol
                and np.abs(self.translation - other.translation).max() <= tol)

    def key(self, tol: float = EPS) -> tuple:
        q = 10.0 * tol
        vals = np.concatenate([self.linear.ravel(), self.translation])
        return tuple(np.round(vals / q).astype(np.int64).tolist())

    def to_json(self) -> dict:
        return {"linear": self.linear.tolist(), "translation": self.translation.tolist()}


@dataclass(frozen=True)
class Isometry3:
    """Rigid spatial motion x -> linear @ x + translation."""

    linear: np.ndarray
    translation: np.ndarray
    word: str = "e"

    def __post_init__(self):
        m = np.asarray(self.linear, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "linear", m)
        object.__setattr__(self, "translation", t)
        if np.abs(m.T @ m - np.eye(3)).max() > 1e-7:
            raise ValueError("linear part is not orthogonal")

    @staticmethod
    def identity() -> "Isometry3":
        return Isometry3(np.eye(3), np.zeros(3), "e")

    @staticmethod
    def translation_by(v, word: str = "t") -> "Isometry3":
        return Isometry3(np.eye(3), np.asarray(v, dtype=float), word)

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.linear @ x + self.translation
        return x @ self.linear.T + self.translation

    __call__ = apply

    def compose(self, other: "Isometry3") -> "Isometry3":
        return Isometry3(self.linear @ other.linear,
                         self.linear @ other.translation + self.translation,
                         f"{self.word}*{other.word}")

    def inverse(self) -> "Isometry3":
        rinv = self.linear.T
        return Isometry3(rinv, -rinv @ self.translation, f"({self.word})^-1")

    def approx_eq(self, other: "Isometry3", tol: float = EPS) -> bool:
        return (np.abs(self.linear - other.linear).max() <= tol
                and np.abs(self.translation - other.translation).max() <= tol)

    def key(self, tol: float = EPS) -> tuple:
        q = 10.0 * tol
        vals = np.concatenate([self.linear.ravel(), self.translation])
        return tuple(np.round(vals / q).astype(np.int64).tolist())

    def to_json(self) -> dict:
        m = np.zeros((4, 4))
        m[:3, :3] = self.linear
        m[:3, 3] = self.translation
        m[3, 3] = 1.0
        return {"matrix": m.tolist()}


def lift_to_3d(g: Isometry2) -> Isometry3:
    """Embed a planar motion into space, acting on the first two coordinates."""
    m = np.eye(3)
    m[:2, :2] = g.linear
    t = np.array([g.translation[0], g.translation[1], 0.0])
    return Isometry3(m, t, g.word)


@dataclass(frozen=True, eq=False)
class WallpaperGroup:
    kind: str
    generators: tuple
    t1: np.ndarray
    t2: np.ndarray
    point_group_order: int = field(init=False)

    def __post_init__(self):
        if self.kind not in SUPPORTED_KINDS:
            raise UnsupportedGroupError(f"unsupported wallpaper kind {self.kind!r}")
        t1 = np.asarray(self.t1, dtype=float).reshape(2)
        t2 = np.asarray(self.t2, dtype=float).reshape(2)
        if abs(t1[0] * t2[1] - t1[1] * t2[0]) <= EPS:
            raise InvalidLatticeError("lattice vectors are linearly dependent")
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "t2", t2)
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "point_group_order", POINT_GROUP_ORDER[self.kind])
        object.__setattr__(self, "_element_cache", {})

    # -- basic lattice data ------------------------------------------------
    def lattice_det(self) -> float:
        return abs(float(self.t1[0] * self.t2[1] - self.t1[1] * self.t2[0]))

    def lattice_diameter(self) -> float:
        return float(np.linalg.norm(self.t1) + np.linalg.norm(self.t2))

    def max_lattice_norm(self) -> float:
        return max(float(np.linalg.norm(self.t1)), float(np.linalg.norm(self.t2)))

    def cell_area(self) -> float:
        """Area of any fundamental domain: |det(t1|t2)| / point group order."""
        return self.lattice_det() / self.point_group_order

    def gens_with_inverses(self) -> list[Isometry2]:
        out = list(self.generators)
        for g in self.generators:
            out.append(g.inverse())
        return out

    # -- element / orbit enumeration ---------------------------------------
    def _elements_around_origin(self, radius: float, cap: int) -> list[Isometry2]:
        """BFS closure of elements moving the origin by at most radius."""
        origin = np.zeros(2)
        slack = 4.0 * self.max_lattice_norm()
        seen: dict[tuple, Isometry2] = {}
        e = Isometry2.identity()
        seen[e.key()] = e
        frontier = [e]
        out = [e]
        gens = self.gens_with_inverses()
        while frontier:
            nxt = []
            for g in frontier:
                for h in gens:
                    cand = h.compose(g)
                    if np.linalg.norm(cand(origin) - origin) > radius + slack:
                        continue
                    k = cand.key()
                    if k in seen:
                        continue
                    if len(seen) >= cap:
                        raise IterationLimitError("element enumeration exceeded cap")
                    seen[k] = cand
                    nxt.append(cand)
                    out.append(cand)
            frontier = nxt
        return out

    def elements_near(self, center, radius: float, cap: int = ITERATION_CAP) -> list[Isometry2]:
        """All group elements moving ``center`` by at most ``radius``.

        Enumerations are cached per rounded search radius around the origin;
        ||g(c) - c|| <= ||g(0)|| + 2||c|| bounds the transfer between centers.
        """
        center = np.asarray(center, dtype=float)
        unit = self.max_lattice_norm()
        need = radius + 2.0 * float(np.linalg.norm(center))
        bucket = unit * math.ceil(need / unit + EPS)
        cache = getattr(self, "_element_cache")
        if bucket not in cache:
            cache[bucket] = self._elements_around_origin(bucket, cap)
        return [g for g in cache[bucket]
                if np.linalg.norm(g(center) - center) <= radius + EPS]

    def orbit_in_disk(self, x, r: float) -> list[tuple[np.ndarray, str]]:
        """Orbit points of x within distance r of x, with generator words.

        Distinct group elements can share an orbit point (stabilizers); points
        are deduplicated with a spatial hash of cell size 10*EPS and the first
        (shortest-word) witness is kept.
        """
        if r <= 0:
            raise ValueError("radius must be positive")
        x = np.asarray(x, dtype=float)
        elements = self.elements_near(x, r + self.lattice_diameter())
        cell = 10 * EPS
        buckets: dict[tuple, np.ndarray] = {}
        out: list[tuple[np.ndarray, str]] = []
        for g in elements:
            p = g(x)
            if np.linalg.norm(p - x) > r:
                continue
            c = (int(round(p[0] / cell)), int(round(p[1] / cell)))
            dup = False
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    q = buckets.get((c[0] + dx, c[1] + dy))
                    if q is not None and np.linalg.norm(q - p) <= EPS:
                        dup = True
                        break
                if dup:
                    break
            if not dup:
                buckets[c] = p
                out.append((p, g.word))
        return out

    def is_general_position(self, x, r: float | None = None) -> bool:
        """True when no non-identity element found within r fixes x."""
        x = np.asarray(x, dtype=float)
        if r is None:
            r = self.max_lattice_norm()
        for g in self.elements_near(x, r):
            if not g.is_identity() and np.linalg.norm(g(x) - x) <= EPS:
                return False
        return True

    # -- 3D ------------------------------------------------------------------
    def space_group_generators(self, c: float) -> list[Isometry3]:
        """Generators of the space group for which a height-c block is a domain.

        Lifted planar generators, the translation (0, 0, 2c) and the
        reflection diag(1, 1, -1).
        """
        if c <= 0:
            raise ValueError("height must be positive")
        out = [lift_to_3d(g) for g in self.generators]
        out.append(Isometry3.translation_by(np.array([0.0, 0.0, 2.0 * c]), "tz"))
        out.append(Isometry3(np.diag([1.0, 1.0, -1.0]), np.zeros(3), "mz"))
        return out

    # -- serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {"kind": self.kind,
                "lattice": {"t1": self.t1.tolist(), "t2": self.t2.tolist()}}

    @staticmethod
    def from_json(obj) -> "WallpaperGroup":
        if isinstance(obj, str):
            obj = json.loads(obj)
        lat = obj.get("lattice") or {}
        return make_group(obj["kind"],
                          t1=lat.get("t1"), t2=lat.get("t2"))


def _check_square(t1, t2):
    if abs(np.linalg.norm(t1) - np.linalg.norm(t2)) > 1e-7 or abs(t1 @ t2) > 1e-7:
        raise InvalidLatticeError("p4 requires a square lattice")


def _check_hexagonal(t1, t2):
    n1, n2 = np.linalg.norm(t1), np.linalg.norm(t2)
    if abs(n1 - n2) > 1e-7:
        raise InvalidLatticeError("hexagonal lattice requires equal lengths")
    c = float(t1 @ t2) / (n1 * n2)
    if abs(abs(c) - 0.5) > 1e-7:
        raise InvalidLatticeError("hexagonal lattice requires a 60/120 degree angle")


def _check_rectangular(t1, t2):
    if abs(t1 @ t2) > 1e-7:
        raise InvalidLatticeError("pg/p2gg use a rectangular lattice (glide along t1)")


def make_group(kind: str, t1=None, t2=None) -> WallpaperGroup:
    """Build one of the seven supported groups with standard generators.

    Where the source examples fix generators (p3, p4, p6) those exact
    matrices and translations are the defaults; p2, pg and p2gg use the
    conventional rectangular settings with the glide along the first axis.
    """
    if kind not in SUPPORTED_KINDS:
        raise UnsupportedGroupError(f"unsupported wallpaper kind {kind!r}")

    defaults = {
        "p1": ((1.0, 0.0), (0.0, 1.0)),
        "p2": ((1.0, 0.0), (0.0, 1.0)),
        "pg": ((1.0, 0.0), (0.0, 1.0)),
        "p2gg": ((1.0, 0.0), (0.0, 1.0)),
        "p3": ((0.0, 1.0), (math.sqrt(3) / 2, -0.5)),
        "p4": ((2.0, 0.0), (0.0, 2.0)),
        "p6": ((2.0, 0.0), (1.0, math.sqrt(3))),
    }
    d1, d2 = defaults[kind]
    t1 = np.asarray(d1 if t1 is None else t1, dtype=float)
    t2 = np.asarray(d2 if t2 is None else t2, dtype=float)

    tr1 = Isometry2.translation_by(t1, "t1")
    tr2 = Isometry2.translation_by(t2, "t2")

    if kind == "p1":
        gens = [tr1, tr2]
    elif kind == "p2":
        gens = [tr1, tr2, Isometry2.rotation(180.0, word="r2")]
    elif kind == "pg":
        _check_rectangular(t1, t2)
        glide = Isometry2(np.diag([1.0, -1.0]), t1 / 2.0, "g")
        gens = [tr1, tr2, glide]
    elif kind == "p2gg":
        _check_rectangular(t1, t2)
        glide = Isometry2(np.diag([1.0, -1.0]), np.array([t1[0] / 2.0, t2[1] / 2.0]), "g")
        gens = [tr1, tr2, Isometry2.rotation(180.0, word="r2"), glide]
    elif kind == "p3":
        _check_hexagonal(t1, t2)
        gens = [tr1, tr2, Isometry2(_rot(120.0), np.zeros(2), "r3")]
    elif kind == "p4":
        _check_square(t1, t2)
        gens = [tr1, tr2, Isometry2(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.zeros(2), "r4")]
    elif kind == "p6":
        _check_hexagonal(t1, t2)
        gens = [tr1, tr2, Isometry2(_rot(60.0), np.zeros(2), "r6")]
    else:  # pragma: no cover
        raise UnsupportedGroupError(kind)

    return WallpaperGroup(kind, tuple(gens), t1, t2)


def conjugate_group(G: WallpaperGroup, h: Isometry2) -> WallpaperGroup:
    """The group h G h^-1 (same kind, generators and lattice transported by h)."""
    hinv = h.inverse()
    gens = tuple(h.compose(g).compose(hinv) for g in G.generators)
    t1 = h.linear @ G.t1
    t2 = h.linear @ G.t2
    return WallpaperGroup(G.kind, gens, t1, t2)
