"""The injectivity certificate: weak compatibility and compatibility.

An assignment of planar control points is weakly compatible when every triple
of lattice points that is affinely independent on both sides induces the same
orientation product; adding pairwise-distinct hull-vertex images upgrades the
verdict to compatible, which is equivalent to the patch being injective for
every choice of positive weights.

Also houses the halfspace diagnostic for hull edges, the piecewise-linear
orientation check over triangulations, and triangulation builders.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import (DegenerateInput, DimensionError, InvalidTriangulation,
                     NotWeaklyCompatible)
from .lattice import (LatticeSet, convex_hull, edge_point_indices,
                      hull_vertex_indices, orient_lattice)

# A triple counts as affinely independent on the image side when its
# determinant exceeds EPS_ORIENT * scale**2, scale = max coordinate spread of
# the control points.  Exact (rational) inputs bypass the threshold entirely.
EPS_ORIENT = 1e-9
FRAGILE_FACTOR = 10.0
VERTEX_DISTINCT_FACTOR = 1e-9
MAX_WITNESSES = 16

VERDICT_COMPATIBLE = "compatible"
VERDICT_WEAKLY_ONLY = "weakly_compatible_only"
VERDICT_NOT_WEAK = "not_weakly_compatible"


@dataclass(frozen=True)
class OrientedTriple:
    indices: tuple[int, int, int]
    domain_sign: int
    image_sign: int

    def to_dict(self) -> dict:
        return {"indices": list(self.indices),
                "domain_sign": self.domain_sign,
                "image_sign": self.image_sign}


@dataclass(frozen=True)
class VertexImageCollision:
    indices: tuple[int, int]  # lattice indices of the two hull vertices
    distance: float

    def to_dict(self) -> dict:
        return {"indices": list(self.indices), "distance": self.distance}


@dataclass(frozen=True)
class CompatibilityReport:
    verdict: str
    global_sign: int | None
    witnesses: tuple[OrientedTriple, ...]
    vertex_collisions: tuple[VertexImageCollision, ...]
    fragile_triples: tuple[OrientedTriple, ...]
    triples_checked: int
    violations_total: int = 0
    no_independent_triple: bool = False
    exact: bool = False

    @property
    def weakly_compatible(self) -> bool:
        return self.verdict != VERDICT_NOT_WEAK

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "global_sign": self.global_sign,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "vertex_collisions": [c.to_dict() for c in self.vertex_collisions],
            "fragile_triples": [t.to_dict() for t in self.fragile_triples],
            "triples_checked": self.triples_checked,
            "violations_total": self.violations_total,
            "no_independent_triple": self.no_independent_triple,
            "exact": self.exact,
        }


def _normalize_control(control, exact: bool):
    """Return (float array (n,2)  or  list of exact (num, num) pairs, is_exact)."""
    if isinstance(control, np.ndarray) and control.dtype != object and not exact:
        ctrl = np.asarray(control, dtype=np.float64)
        return ctrl, False
    rows = list(control)
    has_fraction = any(isinstance(c, Fraction) for row in rows for c in row)
    if exact or has_fraction:
        exact_rows = [tuple(Fraction(c) for c in row) for row in rows]
        return exact_rows, True
    return np.asarray(rows, dtype=np.float64), False


def _control_dim(ctrl, is_exact) -> int:
    if is_exact:
        return len(ctrl[0]) if ctrl else 0
    return int(ctrl.shape[1]) if ctrl.ndim == 2 else 0


def _control_scale(ctrl, is_exact) -> float:
    if is_exact:
        arr = np.array([[float(c) for c in row] for row in ctrl], dtype=np.float64)
    else:
        arr = ctrl
    return float((arr.max(axis=0) - arr.min(axis=0)).max()) if len(arr) else 0.0


def _scan_float(dom: np.ndarray, img: np.ndarray, tau: float, fast: bool,
                max_witnesses: int):
    """Full cubic triple scan, vectorized per leading index.

    Returns (reference, sign, witnesses, fragile, violations_total); reference
    is None when no triple is affinely independent on both sides.
    """
    n = dom.shape[0]
    ref = None
    s = 0
    for i in range(n - 2):
        dd = dom[i + 1:] - dom[i]
        di = img[i + 1:] - img[i]
        D = dd[:, 0][:, None] * dd[:, 1][None, :] - dd[:, 1][:, None] * dd[:, 0][None, :]
        E = di[:, 0][:, None] * di[:, 1][None, :] - di[:, 1][:, None] * di[:, 0][None, :]
        ju, ku = np.triu_indices(dd.shape[0], k=1)
        ds, es = D[ju, ku], E[ju, ku]
        both = (ds != 0) & (np.abs(es) > tau)
        if both.any():
            f = int(np.argmax(both))
            s = int(np.sign(ds[f])) * int(np.sign(es[f]))
            ref = (i, i + 1 + int(ju[f]), i + 1 + int(ku[f]))
            break
    if ref is None:
        return None, 0, [], [], 0

    witnesses: list[OrientedTriple] = []
    fragile: list[OrientedTriple] = []
    violations = 0
    for i in range(n - 2):
        dd = dom[i + 1:] - dom[i]
        di = img[i + 1:] - img[i]
        D = dd[:, 0][:, None] * dd[:, 1][None, :] - dd[:, 1][:, None] * dd[:, 0][None, :]
        E = di[:, 0][:, None] * di[:, 1][None, :] - di[:, 1][:, None] * di[:, 0][None, :]
        ju, ku = np.triu_indices(dd.shape[0], k=1)
        ds, es = D[ju, ku], E[ju, ku]
        dsign = np.sign(ds).astype(np.int64)
        esign = np.where(np.abs(es) > tau, np.sign(es), 0.0).astype(np.int64)
        bad = dsign * esign == -s
        violations += int(bad.sum())
        if bad.any() and len(witnesses) < max_witnesses:
            for f in np.flatnonzero(bad)[:max_witnesses - len(witnesses)]:
                witnesses.append(OrientedTriple(
                    (i, i + 1 + int(ju[f]), i + 1 + int(ku[f])),
                    int(dsign[f]), int(esign[f])))
        frag = (dsign != 0) & (np.abs(es) > 0) & (np.abs(es) <= FRAGILE_FACTOR * tau)
        if frag.any() and len(fragile) < max_witnesses:
            for f in np.flatnonzero(frag)[:max_witnesses - len(fragile)]:
                fragile.append(OrientedTriple(
                    (i, i + 1 + int(ju[f]), i + 1 + int(ku[f])),
                    int(dsign[f]), int(esign[f])))
        if fast and witnesses:
            break
    return ref, s, witnesses, fragile, violations


def _scan_exact(dom, img_int, fast: bool, max_witnesses: int):
    """Same scan with exact integer image coordinates (no threshold)."""
    n = len(dom)
    ref = None
    s = 0
    witnesses: list[OrientedTriple] = []
    violations = 0
    for i, j, k in combinations(range(n), 3):
        d = orient_lattice(dom[i], dom[j], dom[k])
        if d == 0:
            continue
        p, q, r = img_int[i], img_int[j], img_int[k]
        ev = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        if ev == 0:
            continue
        e = 1 if ev > 0 else -1
        if ref is None:
            ref, s = (i, j, k), d * e
        elif d * e != s:
            violations += 1
            if len(witnesses) < max_witnesses:
                witnesses.append(OrientedTriple((i, j, k), d, e))
            if fast:
                break
    return ref, s, witnesses, [], violations


def check_weak(lattice: LatticeSet, control, *, exact: bool = False,
               fast: bool = False, max_witnesses: int = MAX_WITNESSES) -> CompatibilityReport:
    """Decide weak compatibility by the full cubic scan over all triples.

    The report's verdict answers only the weak question: it is
    ``weakly_compatible_only`` when the scan passes (use ``check_compatible``
    to also test vertex-image distinctness) and ``not_weakly_compatible``
    otherwise.  Exact mode accepts rational control points and turns the scan
    into a genuine decision procedure.
    """
    ctrl, is_exact = _normalize_control(control, exact)
    if _control_dim(ctrl, is_exact) != 2:
        raise DimensionError("compatibility requires planar (d = 2) control points")
    n = len(lattice)
    if n < 3:
        raise DegenerateInput("need at least 3 lattice points")

    if is_exact:
        den = math.lcm(*(c.denominator for row in ctrl for c in row))
        img_int = [(int(row[0] * den), int(row[1] * den)) for row in ctrl]
        ref, s, wit, fragile, viol = _scan_exact(lattice.points, img_int, fast, max_witnesses)
    else:
        scale = _control_scale(ctrl, is_exact)
        tau = EPS_ORIENT * scale * scale
        ref, s, wit, fragile, viol = _scan_float(lattice.array, ctrl, tau, fast, max_witnesses)

    checked = math.comb(n, 3)
    if ref is None:
        return CompatibilityReport(VERDICT_NOT_WEAK, None, (), (), (), checked,
                                   no_independent_triple=True, exact=is_exact)
    if wit:
        return CompatibilityReport(VERDICT_NOT_WEAK, None, tuple(wit), (),
                                   tuple(fragile), checked, violations_total=viol,
                                   exact=is_exact)
    return CompatibilityReport(VERDICT_WEAKLY_ONLY, s, (), (), tuple(fragile),
                               checked, exact=is_exact)


def check_compatible(lattice: LatticeSet, control, *, exact: bool = False,
                     fast: bool = False, max_witnesses: int = MAX_WITNESSES) -> CompatibilityReport:
    """Weak compatibility plus pairwise-distinct hull-vertex images."""
    rep = check_weak(lattice, control, exact=exact, fast=fast,
                     max_witnesses=max_witnesses)
    if not rep.weakly_compatible:
        return rep
    ctrl, is_exact = _normalize_control(control, exact)
    poly = convex_hull(lattice)
    verts = hull_vertex_indices(lattice, poly)
    collisions = []
    if is_exact:
        for a, b in combinations(verts, 2):
            if ctrl[a] == ctrl[b]:
                collisions.append(VertexImageCollision((a, b), 0.0))
    else:
        tol = VERTEX_DISTINCT_FACTOR * _control_scale(ctrl, is_exact)
        for a, b in combinations(verts, 2):
            dist = float(np.hypot(*(ctrl[a] - ctrl[b])))
            if dist <= tol:
                collisions.append(VertexImageCollision((a, b), dist))
    if collisions:
        return CompatibilityReport(VERDICT_WEAKLY_ONLY, rep.global_sign, (),
                                   tuple(collisions), rep.fragile_triples,
                                   rep.triples_checked, exact=is_exact)
    return CompatibilityReport(VERDICT_COMPATIBLE, rep.global_sign, (), (),
                               rep.fragile_triples, rep.triples_checked,
                               exact=is_exact)


@dataclass(frozen=True)
class HalfspaceReport:
    """Halfspace containment audit for one hull edge.

    For every pair of distinct images of edge lattice points, all off-edge
    control points must lie in the closed halfspace of non-negatively oriented
    points (orientation adjusted by the certificate's global sign); the
    intersection of those halfspaces is either exterior to the hull of the
    edge images or flags an interior violation.
    """

    edge_index: int
    edge_point_indices: tuple[int, ...]
    halfspaces: tuple[tuple[int, int], ...]
    contained: bool
    violations: tuple[tuple[int, int, int, float], ...]  # (a, di, dj, signed det)
    side: str  # "exterior" | "interior_violation" | "degenerate_edge"
    degenerate_edge: bool


def halfspace_diagnostic(lattice: LatticeSet, control, k: int, *,
                         exact: bool = False,
                         report: CompatibilityReport | None = None) -> HalfspaceReport:
    """Check the halfspace containment property on hull edge ``k``."""
    rep = report if report is not None else check_weak(lattice, control, exact=exact)
    if not rep.weakly_compatible:
        raise NotWeaklyCompatible("halfspace diagnostic requires weak compatibility")
    s = rep.global_sign or 1
    ctrl, is_exact = _normalize_control(control, exact)
    arr = np.array([[float(c) for c in row] for row in ctrl], dtype=np.float64) \
        if is_exact else ctrl
    poly = convex_hull(lattice)
    edge_idx, _ = edge_point_indices(lattice, poly, k)
    on_edge = set(edge_idx)
    scale = _control_scale(ctrl, is_exact)
    tau = EPS_ORIENT * scale * scale
    dist_tol = VERTEX_DISTINCT_FACTOR * scale

    pairs = [(a, b) for a, b in combinations(edge_idx, 2)
             if float(np.hypot(*(arr[a] - arr[b]))) > dist_tol]
    if not pairs:
        return HalfspaceReport(k, tuple(edge_idx), (), True, (),
                               "degenerate_edge", True)

    violations = []
    for di, dj in pairs:
        u = arr[dj] - arr[di]
        for a in range(len(lattice)):
            if a in on_edge:
                continue
            v = arr[a] - arr[di]
            det = s * float(u[0] * v[1] - u[1] * v[0])
            if det < -tau:
                violations.append((a, di, dj, det))

    # dichotomy: the halfspace intersection is either interior or exterior
    # to the hull of the edge images; probe with the centroid of the images
    pts = arr[edge_idx]
    spread = pts.max(axis=0) - pts.min(axis=0)
    side = "exterior"
    if len(edge_idx) >= 3 and min(spread) > dist_tol:
        c = pts.mean(axis=0)
        strictly_inside = True
        for di, dj in pairs:
            u = arr[dj] - arr[di]
            v = c - arr[di]
            if s * float(u[0] * v[1] - u[1] * v[0]) <= tau:
                strictly_inside = False
                break
        if strictly_inside:
            side = "interior_violation"
    return HalfspaceReport(k, tuple(edge_idx), tuple(pairs), not violations,
                           tuple(violations), side, False)


Triangle = tuple[int, int, int]


@dataclass(frozen=True)
class PLMapReport:
    """Orientation audit of the piecewise linear map induced by a triangulation."""

    consistent: bool
    reference_sign: int | None
    signs: tuple[int, ...]
    collapsed: tuple[Triangle, ...]
    violating: tuple[Triangle, ...]


def pl_map_check(lattice: LatticeSet, control, triangulation, *,
                 exact: bool = False) -> PLMapReport:
    """Per-triangle image orientation of the induced piecewise linear map.

    ``triangulation`` is a list of index triples into the lattice ordering,
    counterclockwise in the domain, jointly tiling the hull.  Consistency
    means all nonzero image orientations agree; zero-orientation triangles are
    reported as collapsed, not as violations.
    """
    ctrl, is_exact = _normalize_control(control, exact)
    if _control_dim(ctrl, is_exact) != 2:
        raise DimensionError("PL check requires planar control points")
    poly = convex_hull(lattice)
    tris = [tuple(int(i) for i in t) for t in triangulation]
    n = len(lattice)
    doubled = 0
    for t in tris:
        if len(t) != 3 or len(set(t)) != 3 or not all(0 <= i < n for i in t):
            raise InvalidTriangulation(f"bad triangle {t}")
        p, q, r = (lattice[i] for i in t)
        det = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        if det <= 0:
            raise InvalidTriangulation(
                f"triangle {t} is not counterclockwise in the domain")
        doubled += det
    if doubled != poly.doubled_area:
        raise InvalidTriangulation(
            f"doubled area {doubled} != hull doubled area {poly.doubled_area} "
            "(overlap or gap)")

    if is_exact:
        dets = []
        for t in tris:
            p, q, r = (ctrl[i] for i in t)
            dets.append((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
        signs = [0 if d == 0 else (1 if d > 0 else -1) for d in dets]
    else:
        scale = _control_scale(ctrl, is_exact)
        tau = EPS_ORIENT * scale * scale
        signs = []
        for t in tris:
            p, q, r = (ctrl[i] for i in t)
            d = float((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
            signs.append(0 if abs(d) <= tau else (1 if d > 0 else -1))

    ref = next((sg for sg in signs if sg != 0), None)
    collapsed = tuple(t for t, sg in zip(tris, signs) if sg == 0)
    violating = tuple(t for t, sg in zip(tris, signs)
                      if sg != 0 and ref is not None and sg != ref)
    return PLMapReport(not violating, ref, tuple(signs), collapsed, violating)


def _ccw(pts, i, j, k) -> Triangle:
    if orient_lattice(pts[i], pts[j], pts[k]) > 0:
        return (i, j, k)
    return (i, k, j)


def default_triangulation(lattice: LatticeSet) -> tuple[Triangle, ...]:
    """Lexicographic incremental triangulation using every point of the set.

    Points are inserted in lexicographic order; each new point is extreme for
    the set seen so far, so it connects to all strictly visible hull edges.
    Collinear boundary points are kept on the hull chain so no triangle ever
    spans them.
    """
    n = len(lattice)
    if n < 3:
        raise DegenerateInput("need at least 3 lattice points")
    pts = lattice.points
    order = sorted(range(n), key=lambda i: pts[i])
    apex_pos = None
    for j in range(2, n):
        if orient_lattice(pts[order[0]], pts[order[1]], pts[order[j]]) != 0:
            apex_pos = j
            break
    if apex_pos is None:
        raise DegenerateInput("all lattice points are collinear")

    chain = [order[t] for t in range(apex_pos)]
    apex = order[apex_pos]
    triangles = [_ccw(pts, chain[t], chain[t + 1], apex)
                 for t in range(len(chain) - 1)]
    if orient_lattice(pts[chain[0]], pts[chain[-1]], pts[apex]) > 0:
        hull = chain + [apex]
    else:
        hull = list(reversed(chain)) + [apex]

    for pos in range(apex_pos + 1, n):
        p = order[pos]
        L = len(hull)
        visible = [orient_lattice(pts[hull[e]], pts[hull[(e + 1) % L]], pts[p]) < 0
                   for e in range(L)]
        start = next(e for e in range(L)
                     if visible[e] and not visible[(e - 1) % L])
        hull = hull[start:] + hull[:start]
        visible = visible[start:] + visible[:start]
        run = 0
        while run < L and visible[run]:
            triangles.append((hull[(run + 1) % L], hull[run], p))
            run += 1
        hull = [hull[0], p] + hull[run:] if run < L else [hull[0], p]
    return tuple(triangles)


def randomized_triangulation(lattice: LatticeSet, seed: int,
                             flips: int | None = None) -> tuple[Triangle, ...]:
    """Random valid triangulation: Lawson flips applied to the default one.

    Deterministic per seed; every output tiles the hull and uses all points.
    """
    tris = [tuple(t) for t in default_triangulation(lattice)]
    rng = random.Random(seed)
    pts = lattice.points
    rounds = flips if flips is not None else 3 * len(tris)
    for _ in range(rounds):
        shared: dict[tuple[int, int], list[int]] = {}
        for ti, t in enumerate(tris):
            for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                shared.setdefault(tuple(sorted(e)), []).append(ti)
        interior = sorted(e for e, owners in shared.items() if len(owners) == 2)
        if not interior:
            break
        a, b = interior[rng.randrange(len(interior))]
        t1_i, t2_i = shared[(a, b)]
        t1, t2 = tris[t1_i], tris[t2_i]
        c = next(v for v in t1 if v not in (a, b))
        d = next(v for v in t2 if v not in (a, b))
        # orient so that t1 holds directed edge (a, b)
        if (b, a) in ((t1[0], t1[1]), (t1[1], t1[2]), (t1[2], t1[0])):
            a, b = b, a
        if orient_lattice(pts[c], pts[a], pts[d]) > 0 and \
           orient_lattice(pts[c], pts[d], pts[b]) > 0:
            tris[t1_i] = (c, a, d)
            tris[t2_i] = (c, d, b)
    return tuple(tris)
