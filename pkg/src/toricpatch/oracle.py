"""Sampling-based injectivity oracle.

Dense domain sampling (interior grid + hull edges + vertices), candidate
collision pairs via spatial queries on the image cloud, and local bisection
refinement that either drives a candidate's image distance below 1e-10 (a
verified self-intersection) or discards it.  Absence of collisions is
sampling evidence, never a proof; reports say so.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import basis as _basis
from .compatibility import (VERDICT_COMPATIBLE, VERDICT_WEAKLY_ONLY,
                            CompatibilityReport, check_compatible)
from .errors import CertificateDisagreement
from .lattice import LatticeSet, Polygon, convex_hull, edge_direction
from .patch import PatchSpec, eval_patch_many

DEFAULT_GRID = 128
DELTA_DOM_FACTOR = 0.05     # default domain separation: 0.05 * diam(domain)
EPS_IMG_FACTOR = 1e-7       # default image threshold: 1e-7 * diam(image)
REFINE_TARGET = 1e-10       # refined pairs below this are verified collisions
CANDIDATE_ALPHA = 0.6       # candidate if image dist < alpha * local feature size
BOUNDARY_H_TOL = 1e-8       # a point with some h below this sits on a hull edge
MAX_REPORTED_PAIRS = 64
MAX_REFINED = 400


def _domain_samples(poly: Polygon, n: int) -> tuple[np.ndarray, float]:
    """Bounding-box grid filtered to the hull, plus edge samples and vertices.

    Returns the deduplicated points and the grid spacing.  Boundary coverage
    matters: the certificate's extra hypothesis lives entirely on the
    boundary, so every hull vertex and n points per edge are always present.
    """
    x0, y0, x1, y1 = poly.bounding_box
    gx = np.linspace(float(x0), float(x1), n)
    gy = np.linspace(float(y0), float(y1), n)
    grid = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1).reshape(-1, 2)
    H = _basis.h_matrix(poly, grid)
    inside = grid[np.all(H >= -_basis.EPS_MEMBERSHIP, axis=1)]

    pts: list[tuple[float, float]] = []
    seen: set[tuple[float, float]] = set()

    def push(p):
        key = (float(p[0]), float(p[1]))
        if key not in seen:
            seen.add(key)
            pts.append(key)

    for p in inside:
        push(p)
    for k in range(poly.edge_count):
        (sx, sy), (ux, uy), g = edge_direction(poly, k)
        for j in range(n):
            t = g * (j + 1) / (n + 1)
            push((sx + t * ux, sy + t * uy))
    for v in poly.vertices:
        push((float(v[0]), float(v[1])))
    spacing = max(x1 - x0, y1 - y0) / (n - 1)
    return np.array(pts, dtype=np.float64), spacing


@dataclass(frozen=True)
class SampleCloud:
    """Domain/image sample pairs plus the patch they were drawn from."""

    domain: np.ndarray
    image: np.ndarray
    resolution: int
    grid_spacing: float
    weight_hash: str
    spec: PatchSpec
    domain_neighbors: np.ndarray | None = None  # cached (N, k) domain k-NN indices


def weight_hash(weights: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(weights).tobytes()).hexdigest()[:16]


def sample_patch(spec: PatchSpec, n: int) -> SampleCloud:
    """Evaluate the patch on the standard sample set at resolution ``n``."""
    if n < 8:
        raise ValueError("grid resolution must be >= 8")
    pts, spacing = _domain_samples(spec.poly, n)
    img = eval_patch_many(spec, pts)
    return SampleCloud(pts, img, n, spacing, weight_hash(spec.weights), spec)


@dataclass(frozen=True)
class CollisionPair:
    p: tuple[float, float]
    q: tuple[float, float]
    image_distance: float
    domain_distance: float
    on_boundary: bool

    def to_dict(self) -> dict:
        return {"p": list(self.p), "q": list(self.q),
                "image_distance": self.image_distance,
                "domain_distance": self.domain_distance,
                "on_boundary": self.on_boundary}


@dataclass(frozen=True)
class CollisionReport:
    verdict: str  # "no_collision_found" | "collision" | "boundary_collapse"
    pairs: tuple[CollisionPair, ...]
    total_pairs: int
    candidates: int
    refined: int
    delta_dom: float
    eps_img: float
    note: str

    def to_dict(self) -> dict:
        return {"verdict": self.verdict,
                "pairs": [p.to_dict() for p in self.pairs],
                "total_pairs": self.total_pairs,
                "candidates": self.candidates,
                "refined": self.refined,
                "delta_dom": self.delta_dom,
                "eps_img": self.eps_img,
                "note": self.note}


def domain_neighbor_indices(domain: np.ndarray, k: int = 5) -> np.ndarray:
    """(N, k-1) indices of each sample's nearest domain neighbours."""
    k = min(k, len(domain))
    _, nbr = cKDTree(domain).query(domain, k=k)
    return np.atleast_2d(nbr)[:, 1:]


def _local_feature_size(cloud: SampleCloud) -> np.ndarray:
    """Per-sample image distance to its nearest domain neighbours.

    Bounds how far apart the images of nearby domain points can drift; a
    strange pair whose image distance undercuts both local scales is a
    collision candidate.
    """
    nbr = cloud.domain_neighbors
    if nbr is None:
        nbr = domain_neighbor_indices(cloud.domain)
    diffs = cloud.image[nbr] - cloud.image[:, None, :]
    return np.sqrt((diffs ** 2).sum(axis=2)).max(axis=1)


def _coincidence_pairs(img: np.ndarray, eps: float) -> np.ndarray:
    """All index pairs with images within eps, via a sorted-x window.

    Exhaustive at radius eps except that each point is paired with at most its
    64 window predecessors; coincidence clusters (collapsed edges) stay fully
    represented because ties sort by original index, i.e. along the domain.
    """
    n = len(img)
    order = np.argsort(img[:, 0], kind="stable")
    xs = img[order, 0]
    lo = np.searchsorted(xs, xs - eps, side="left")
    counts = np.minimum(np.arange(n) - lo, 64)
    total = int(counts.sum())
    if total == 0:
        return np.empty((0, 2), dtype=np.int64)
    rep_i = np.repeat(np.arange(n), counts)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    rep_j = np.arange(total) - starts + np.repeat(np.arange(n) - counts, counts)
    a, b = order[rep_i], order[rep_j]
    close = ((img[a] - img[b]) ** 2).sum(axis=1) <= eps * eps
    a, b = a[close], b[close]
    return np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)


def _fold_pairs(cloud: SampleCloud, sigma: np.ndarray, eps: float) -> np.ndarray:
    """Suspicious pairs from image k-NN: closer in the image than the local
    feature size of both endpoints (or than eps) allows."""
    n = len(cloud.image)
    k = min(8, n)
    dist, nbr = cKDTree(cloud.image).query(cloud.image, k=k)
    dist, nbr = np.atleast_2d(dist)[:, 1:], np.atleast_2d(nbr)[:, 1:]
    src = np.repeat(np.arange(n), k - 1)
    dst = nbr.ravel()
    d = dist.ravel()
    bound = np.maximum(eps, CANDIDATE_ALPHA * np.minimum(sigma[src], sigma[dst]))
    keep = d < bound
    a, b = src[keep], dst[keep]
    return np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)


def _min_h(spec: PatchSpec, pts: np.ndarray) -> np.ndarray:
    return _basis.h_matrix(spec.poly, pts).min(axis=1)


_OFFSETS = np.array([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1),
                     (1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=np.float64)


def _masked_images(spec: PatchSpec, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Images of pts plus a mask of rows lying outside the domain."""
    bad = _min_h(spec, pts) < -_basis.EPS_MEMBERSHIP
    safe = pts
    if bad.any():
        safe = pts.copy()
        safe[bad] = np.asarray(spec.poly.vertices[0], dtype=np.float64)
    return eval_patch_many(spec, safe), bad


def _pattern_rounds(spec: PatchSpec, P, Q, best, rad, delta_dom, rounds: int,
                    kill: float = 3e-3):
    """Shrinking-radius pattern search over both preimage neighborhoods.

    A pair is abandoned once its radius falls far below its residual image
    distance: no nearby move can close a gap that large any more.
    """
    m = len(_OFFSETS)
    for _ in range(rounds):
        active = (best >= REFINE_TARGET * 0.5) & (rad >= 1e-15) & \
                 (rad >= kill * best)
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        cp = P[idx, None, :] + rad[idx, None, None] * _OFFSETS[None, :, :]
        cq = Q[idx, None, :] + rad[idx, None, None] * _OFFSETS[None, :, :]
        ip, badp = _masked_images(spec, cp.reshape(-1, 2))
        iq, badq = _masked_images(spec, cq.reshape(-1, 2))
        ip = ip.reshape(idx.size, m, -1)
        iq = iq.reshape(idx.size, m, -1)
        dimg = np.sqrt(((ip[:, :, None, :] - iq[:, None, :, :]) ** 2).sum(axis=3))
        ddom = np.sqrt(((cp[:, :, None, :] - cq[:, None, :, :]) ** 2).sum(axis=3))
        dimg[ddom <= delta_dom] = np.inf
        dimg[badp.reshape(idx.size, m)[:, :, None].repeat(m, axis=2)] = np.inf
        dimg[badq.reshape(idx.size, m)[:, None, :].repeat(m, axis=1)] = np.inf
        flat = dimg.reshape(idx.size, -1)
        pick = np.argmin(flat, axis=1)
        val = flat[np.arange(idx.size), pick]
        improved = val < best[idx]
        gi = idx[improved]
        oi, oj = np.unravel_index(pick[improved], (m, m))
        P[gi] = cp[improved, oi]
        Q[gi] = cq[improved, oj]
        best[gi] = val[improved]
        rad[idx[~improved]] *= 0.5


def _fd_jacobians(spec: PatchSpec, X: np.ndarray, step: float):
    """Central-difference Jacobians (C, 2, 2); step shrinks near the boundary."""
    norms = np.hypot(spec.poly.normal_matrix[:, 0],
                     spec.poly.normal_matrix[:, 1]).astype(np.float64)
    margin = (_basis.h_matrix(spec.poly, X) / norms[None, :]).min(axis=1)
    s = np.minimum(step, 0.45 * np.maximum(margin, 0.0))
    usable = s > 1e-13
    s = np.where(usable, s, 1.0)  # dummy step for unusable rows, masked out below
    e1 = np.stack([s, np.zeros_like(s)], axis=1)
    e2 = np.stack([np.zeros_like(s), s], axis=1)
    stacked = np.concatenate([X + e1, X - e1, X + e2, X - e2])
    img, bad = _masked_images(spec, stacked)
    c = len(X)
    J = np.empty((c, 2, 2))
    J[:, :, 0] = (img[:c] - img[c:2 * c]) / (2 * s[:, None])
    J[:, :, 1] = (img[2 * c:3 * c] - img[3 * c:]) / (2 * s[:, None])
    usable &= ~bad.reshape(4, c).any(axis=0)
    return J, usable


def _gauss_newton_rounds(spec: PatchSpec, P, Q, best, delta_dom, rounds: int,
                         fd_step: float, floor: float = REFINE_TARGET * 0.5):
    """Least-norm Gauss-Newton on F(p) - F(q) = 0 with backtracking.

    Quadratically closes in on genuine crossings; pairs at local minima above
    zero stop improving and drop out.  With ``floor=0`` it keeps polishing
    already-confirmed pairs toward the zero set itself, which settles whether
    a collision lives on the hull boundary or in the interior.
    """
    stalled = np.zeros(len(P), dtype=bool)
    ts = np.array([1.0, 0.5, 0.25, 0.125])
    for _ in range(rounds):
        idx = np.flatnonzero((best > floor) & ~stalled)
        if idx.size == 0:
            break
        p, q = P[idx], Q[idx]
        g = eval_patch_many(spec, p) - eval_patch_many(spec, q)
        Jp, okp = _fd_jacobians(spec, p, fd_step)
        Jq, okq = _fd_jacobians(spec, q, fd_step)
        M = Jp @ Jp.transpose(0, 2, 1) + Jq @ Jq.transpose(0, 2, 1)
        a, b = M[:, 0, 0], M[:, 0, 1]
        cc, d = M[:, 1, 0], M[:, 1, 1]
        det = a * d - b * cc
        det = np.where(np.abs(det) > 1e-30 * (a + d) ** 2 + 1e-300, det, np.inf)
        lam = np.stack([(d * g[:, 0] - b * g[:, 1]) / det,
                        (-cc * g[:, 0] + a * g[:, 1]) / det], axis=1)
        dp = -np.einsum("cij,ci->cj", Jp, lam)
        dq = np.einsum("cij,ci->cj", Jq, lam)
        ok = okp & okq & np.isfinite(lam).all(axis=1)
        dp[~ok] = 0.0
        dq[~ok] = 0.0
        # try damped steps, keep the best valid improvement per pair
        cand_p = p[None, :, :] + ts[:, None, None] * dp[None, :, :]
        cand_q = q[None, :, :] + ts[:, None, None] * dq[None, :, :]
        ip, badp = _masked_images(spec, cand_p.reshape(-1, 2))
        iq, badq = _masked_images(spec, cand_q.reshape(-1, 2))
        dist = np.sqrt(((ip - iq) ** 2).sum(axis=1)).reshape(len(ts), idx.size)
        ddom = np.sqrt(((cand_p - cand_q) ** 2).sum(axis=2))
        invalid = (badp | badq).reshape(len(ts), idx.size) | (ddom <= delta_dom)
        dist[invalid] = np.inf
        pick = np.argmin(dist, axis=0)
        val = dist[pick, np.arange(idx.size)]
        improved = val < best[idx] * 0.9
        gi = idx[improved]
        P[gi] = cand_p[pick[improved], np.flatnonzero(improved)]
        Q[gi] = cand_q[pick[improved], np.flatnonzero(improved)]
        best[gi] = val[improved]
        stalled[idx[~improved]] = True


def _refine_pairs(spec: PatchSpec, P: np.ndarray, Q: np.ndarray,
                  delta_dom: float, radius0: float):
    """Drive candidate pairs toward |F(p) - F(q)| = 0, or rule them out.

    Bisection-style pattern search localizes the valley, a Gauss-Newton polish
    converges on genuine crossings, and a final pattern phase mops up pairs
    the polish could not handle (for instance along the hull boundary).  Pairs
    stay inside the domain and more than delta_dom apart throughout.
    """
    P, Q = P.copy(), Q.copy()
    best = np.sqrt(((eval_patch_many(spec, P) - eval_patch_many(spec, Q)) ** 2).sum(axis=1))
    rad = np.full(len(P), radius0)
    fd = 1e-7 * max(spec.domain_diameter, 1.0)
    _pattern_rounds(spec, P, Q, best, rad, delta_dom, 4)
    _gauss_newton_rounds(spec, P, Q, best, delta_dom, 14, fd)
    _pattern_rounds(spec, P, Q, best, rad, delta_dom, 34)
    # settle confirmed pairs onto the zero set so the boundary / interior
    # classification reflects the limit, not where the search stopped
    if bool((best < REFINE_TARGET).any()):
        _gauss_newton_rounds(spec, P, Q, best, delta_dom, 8, fd, floor=0.0)
    return P, Q, best


def find_collisions(cloud: SampleCloud, delta_dom: float | None = None,
                    eps_img: float | None = None) -> CollisionReport:
    """Search the cloud for verified self-intersections.

    Reported pairs always satisfy |p - q| > delta_dom and
    |F(p) - F(q)| < eps_img (indeed below the 1e-10 refinement target, so
    each pair can be re-verified by direct evaluation).  The verdict is
    ``boundary_collapse`` when every verified pair lies on hull edges.
    """
    spec = cloud.spec
    if delta_dom is None:
        delta_dom = DELTA_DOM_FACTOR * spec.domain_diameter
    if eps_img is None:
        eps_img = EPS_IMG_FACTOR * spec.image_diameter
    if eps_img <= 0:
        raise ValueError("eps_img must be positive")
    if delta_dom <= 2 * cloud.grid_spacing:
        raise ValueError(
            f"delta_dom = {delta_dom} must exceed twice the grid spacing "
            f"{cloud.grid_spacing} to rule out continuity false positives")

    sigma = _local_feature_size(cloud)
    note = "sampling evidence only; absence of collisions is not a proof"
    pairs = np.concatenate([_coincidence_pairs(cloud.image, eps_img),
                            _fold_pairs(cloud, sigma, eps_img)])
    if pairs.size:
        keys = pairs[:, 0] * len(cloud.image) + pairs[:, 1]
        pairs = pairs[np.unique(keys, return_index=True)[1]]
    if pairs.size == 0:
        return CollisionReport("no_collision_found", (), 0, 0, 0,
                               delta_dom, eps_img, note)

    dom_d = np.sqrt(((cloud.domain[pairs[:, 0]] - cloud.domain[pairs[:, 1]]) ** 2).sum(axis=1))
    img_d = np.sqrt(((cloud.image[pairs[:, 0]] - cloud.image[pairs[:, 1]]) ** 2).sum(axis=1))
    keep = dom_d > delta_dom
    pairs, dom_d, img_d = pairs[keep], dom_d[keep], img_d[keep]
    n_candidates = int(pairs.shape[0])
    if n_candidates == 0:
        return CollisionReport("no_collision_found", (), 0, 0, 0,
                               delta_dom, eps_img, note)

    # one representative per pair of domain grid cells: refining near-duplicate
    # candidates would converge to the same local minimum anyway
    h = 2 * cloud.grid_spacing
    cells = np.column_stack([
        np.rint(cloud.domain[pairs[:, 0]] / h).astype(np.int64),
        np.rint(cloud.domain[pairs[:, 1]] / h).astype(np.int64)])
    order = np.lexsort((pairs[:, 1], pairs[:, 0], img_d))
    _, first = np.unique(cells[order], axis=0, return_index=True)
    order = order[np.sort(first)][:MAX_REFINED]

    P = cloud.domain[pairs[order, 0]]
    Q = cloud.domain[pairs[order, 1]]
    refined = int(order.size)
    P, Q, dist = _refine_pairs(spec, P, Q, delta_dom, 2 * cloud.grid_spacing)
    hit = dist < REFINE_TARGET
    total = int(hit.sum())
    confirmed: list[CollisionPair] = []
    for f in np.flatnonzero(hit)[:MAX_REPORTED_PAIRS]:
        p, q, d = P[f], Q[f], float(dist[f])
        on_edge = bool(_min_h(spec, np.stack([p, q])).max() <= BOUNDARY_H_TOL)
        confirmed.append(CollisionPair(
            (float(p[0]), float(p[1])), (float(q[0]), float(q[1])),
            d, float(np.hypot(*(p - q))), on_edge))
    if not confirmed:
        return CollisionReport("no_collision_found", (), 0, n_candidates, refined,
                               delta_dom, eps_img, note)
    verdict = "boundary_collapse" if all(c.on_boundary for c in confirmed) else "collision"
    return CollisionReport(verdict, tuple(confirmed), total, n_candidates, refined,
                           delta_dom, eps_img, note)


def random_weights(lattice: LatticeSet, seed: int, spread: float) -> np.ndarray:
    """Log-uniform weights in [1/spread, spread], deterministic per seed."""
    if spread < 1:
        raise ValueError("spread must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-np.log(spread), np.log(spread), size=len(lattice))
    return np.exp(u)


@dataclass(frozen=True)
class StressSummary:
    certificate: CompatibilityReport
    trials: int
    grid: int
    spread: float
    seed: int
    agreements: int
    disagreements: tuple[str, ...]
    reports: tuple[CollisionReport, ...]
    note: str

    def to_dict(self) -> dict:
        return {"certificate": self.certificate.to_dict(),
                "trials": self.trials,
                "grid": self.grid,
                "spread": self.spread,
                "seed": self.seed,
                "agreements": self.agreements,
                "disagreements": list(self.disagreements),
                "reports": [r.to_dict() for r in self.reports],
                "note": self.note}


def stress_certificate(lattice: LatticeSet, control, trials: int = 100,
                       n: int = DEFAULT_GRID, spread: float = 100.0, *,
                       seed: int = 0, delta_dom: float | None = None,
                       eps_img: float | None = None) -> StressSummary:
    """Test the certificate against the oracle over random weight draws.

    compatible        -> no trial may find any verified collision;
    weakly-only       -> every trial must report a boundary collapse
                         (coincident vertex images collapse an edge);
    not weakly compat -> existential claim over weights; nothing asserted.

    A mismatch raises CertificateDisagreement carrying the full summary: it
    signals a bug in either side and is never swallowed.
    """
    cert = check_compatible(lattice, control)
    ctrl = np.array([[float(c) for c in row] for row in control], dtype=np.float64)
    poly = convex_hull(lattice)
    pts, spacing = _domain_samples(poly, n)
    bas = _basis.basis_matrix(poly, lattice, pts)
    nbrs = domain_neighbor_indices(pts)

    reports: list[CollisionReport] = []
    disagreements: list[str] = []
    for t in range(trials):
        w = random_weights(lattice, seed=seed * 1_000_003 + t, spread=spread)
        spec = PatchSpec.build(lattice, ctrl, w, poly=poly)
        img = eval_patch_many(spec, pts, basis=bas)
        cloud = SampleCloud(pts, img, n, spacing, weight_hash(w), spec, nbrs)
        rep = find_collisions(cloud, delta_dom, eps_img)
        reports.append(rep)
        if cert.verdict == VERDICT_COMPATIBLE and rep.verdict != "no_collision_found":
            disagreements.append(
                f"trial {t}: certificate says compatible but oracle found "
                f"{rep.verdict} ({rep.total_pairs} pairs)")
        elif cert.verdict == VERDICT_WEAKLY_ONLY and cert.vertex_collisions and \
                rep.verdict != "boundary_collapse":
            disagreements.append(
                f"trial {t}: coincident vertex images but oracle reported {rep.verdict}")

    summary = StressSummary(
        cert, trials, n, spread, seed, trials - len(disagreements),
        tuple(disagreements), tuple(reports),
        f"tested {trials} weight samples; sampling evidence only")
    if disagreements:
        raise CertificateDisagreement(
            f"{len(disagreements)} certificate/oracle disagreements", summary)
    return summary
