"""Exact integer geometry of planar lattice sets.

Convex hulls with primitive inward edge inequalities, orientation predicates,
and vertex / edge / interior classification.  Everything here is computed in
exact integer arithmetic; floating point never enters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from .errors import CoordinateOverflow, DegenerateInput

LatticePoint = tuple[int, int]

# Coordinates beyond this bound are rejected at construction time so that
# every determinant and edge-inequality value downstream fits comfortably in
# 64-bit intermediates (Python ints are exact regardless; the bound keeps the
# numpy fast paths exact too).
COORD_LIMIT = 1 << 20


def _as_int(v) -> int:
    if isinstance(v, bool):
        raise TypeError("lattice coordinates must be integers, got bool")
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, float) and v.is_integer():
        return int(v)
    raise TypeError(f"lattice coordinates must be integers, got {v!r}")


def _check_coord(c: int) -> int:
    if abs(c) > COORD_LIMIT:
        raise CoordinateOverflow(
            f"lattice coordinate {c} exceeds the exactness bound {COORD_LIMIT}")
    return c


@dataclass(frozen=True)
class LatticeSet:
    """Ordered, duplicate-free finite set of integer lattice points."""

    points: tuple[LatticePoint, ...]

    def __post_init__(self):
        seen = set()
        for p in self.points:
            if len(p) != 2:
                raise TypeError(f"lattice points are planar, got {p!r}")
            _check_coord(p[0])
            _check_coord(p[1])
            if p in seen:
                raise ValueError(f"duplicate lattice point {p}")
            seen.add(p)

    @classmethod
    def of(cls, pts: Iterable) -> "LatticeSet":
        return cls(tuple((_as_int(x), _as_int(y)) for x, y in pts))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[LatticePoint]:
        return iter(self.points)

    def __getitem__(self, i: int) -> LatticePoint:
        return self.points[i]

    @cached_property
    def index(self) -> dict[LatticePoint, int]:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def array(self) -> np.ndarray:
        """(n, 2) int64 view of the points."""
        a = np.array(self.points, dtype=np.int64).reshape(-1, 2)
        a.setflags(write=False)
        return a


@dataclass(frozen=True)
class EdgeInequality:
    """Integer linear form h(x, y) = a*x + b*y + c with primitive normal (a, b).

    Nonnegative on the polygon, zero exactly on one hull edge.
    """

    a: int
    b: int
    c: int

    def __call__(self, x, y):
        return self.a * x + self.b * y + self.c


@dataclass(frozen=True)
class Polygon:
    """Convex hull as a CCW vertex cycle plus one edge inequality per edge.

    ``edges[k]`` vanishes on the edge from ``vertices[k]`` to
    ``vertices[(k + 1) % len(vertices)]``.
    """

    vertices: tuple[LatticePoint, ...]
    edges: tuple[EdgeInequality, ...]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def normal_matrix(self) -> np.ndarray:
        """(l, 2) int64 matrix of inward normals."""
        a = np.array([(e.a, e.b) for e in self.edges], dtype=np.int64)
        a.setflags(write=False)
        return a

    @cached_property
    def offsets(self) -> np.ndarray:
        a = np.array([e.c for e in self.edges], dtype=np.int64)
        a.setflags(write=False)
        return a

    @cached_property
    def doubled_area(self) -> int:
        v = self.vertices
        total = 0
        for k in range(len(v)):
            x0, y0 = v[k]
            x1, y1 = v[(k + 1) % len(v)]
            total += x0 * y1 - x1 * y0
        return total

    @cached_property
    def bounding_box(self) -> tuple[int, int, int, int]:
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    @property
    def diameter(self) -> float:
        x0, y0, x1, y1 = self.bounding_box
        return math.hypot(x1 - x0, y1 - y0)

    def h_values(self, x, y) -> list:
        return [e(x, y) for e in self.edges]


def orient_lattice(p: LatticePoint, q: LatticePoint, r: LatticePoint) -> int:
    """Sign of det(q - p, r - p), computed exactly; 0 iff collinear."""
    d = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (d > 0) - (d < 0)


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(s: LatticeSet) -> Polygon:
    """Strictly convex hull of ``s`` with primitive inward edge inequalities.

    Collinear boundary lattice points are not hull vertices.  The vertex cycle
    is counterclockwise and starts at the lexicographically smallest vertex.
    """
    if len(s) < 3:
        raise DegenerateInput("need at least 3 lattice points")
    pts = sorted(set(s.points))
    lower: list[LatticePoint] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[LatticePoint] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateInput("all lattice points are collinear")

    edges = []
    for k in range(len(hull)):
        x0, y0 = hull[k]
        x1, y1 = hull[(k + 1) % len(hull)]
        dx, dy = x1 - x0, y1 - y0
        g = math.gcd(abs(dx), abs(dy))
        a, b = -dy // g, dx // g
        edges.append(EdgeInequality(a, b, -(a * x0 + b * y0)))
    return Polygon(tuple(hull), tuple(edges))


@dataclass(frozen=True)
class PointTag:
    """Location of a lattice point relative to its hull.

    ``kind`` is one of "vertex", "edge_interior", "interior"; ``edge`` is the
    vanishing edge index for edge_interior points.
    """

    kind: str
    edge: int | None = None


def classify(s: LatticeSet, poly: Polygon) -> list[PointTag]:
    """Tag every point of ``s`` as hull vertex, edge-interior, or interior.

    Assumes ``poly == convex_hull(s)``, so every h value is a nonnegative
    exact integer.
    """
    tags = []
    for x, y in s:
        zero = [k for k, e in enumerate(poly.edges) if e(x, y) == 0]
        if len(zero) >= 2:
            tags.append(PointTag("vertex"))
        elif len(zero) == 1:
            tags.append(PointTag("edge_interior", zero[0]))
        else:
            tags.append(PointTag("interior"))
    return tags


def hull_vertex_indices(s: LatticeSet, poly: Polygon) -> list[int]:
    """Lattice indices of the hull vertices, in hull cycle order."""
    return [s.index[v] for v in poly.vertices]


def edge_direction(poly: Polygon, k: int) -> tuple[LatticePoint, LatticePoint, int]:
    """Start vertex, primitive step, and integer length of hull edge ``k``."""
    x0, y0 = poly.vertices[k]
    x1, y1 = poly.vertices[(k + 1) % len(poly.vertices)]
    dx, dy = x1 - x0, y1 - y0
    g = math.gcd(abs(dx), abs(dy))
    return (x0, y0), (dx // g, dy // g), g


def edge_point_indices(s: LatticeSet, poly: Polygon, k: int) -> tuple[list[int], list[int]]:
    """Lattice indices on hull edge ``k`` with their integer edge parameters.

    Ordered by parameter, i.e. along the CCW direction of the edge; both
    endpoint vertices are included when they belong to ``s``.
    """
    (x0, y0), (ux, uy), _ = edge_direction(poly, k)
    e = poly.edges[k]
    found = []
    for i, (x, y) in enumerate(s):
        if e(x, y) == 0:
            t = (x - x0) // ux if ux else (y - y0) // uy
            found.append((t, i))
    found.sort()
    return [i for _, i in found], [t for t, _ in found]
