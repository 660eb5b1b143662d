"""The rational patch map: evaluation, edge restriction, Jacobian sampling.

The map sends a domain point x to the weighted convex combination

    F_w(x) = sum_a w_a f(a) beta_a(x) / sum_a w_a beta_a(x)

so its image always lies in the convex hull of the control points and hull
vertices are interpolated exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import basis as _basis
from .errors import DimensionError, NumericalUnderflow, OutsideDomain
from .lattice import (LatticePoint, LatticeSet, Polygon, convex_hull,
                      edge_direction, edge_point_indices)

DEN_UNDERFLOW = 1e-300
# Strict-interior filter and relative finite-difference step for the
# Jacobian sampler.
JAC_INTERIOR_H = 1e-6
JAC_STEP_FACTOR = 1e-6
JAC_NEAR_ZERO = 1e-9


@dataclass(frozen=True)
class PatchSpec:
    """Immutable bundle: lattice set, its hull, control points, weights.

    All three indexed collections share the lattice ordering.  Arrays are
    marked read-only; evaluation never mutates a spec.
    """

    lattice: LatticeSet
    poly: Polygon
    control: np.ndarray  # (n, d) float64
    weights: np.ndarray  # (n,) float64, strictly positive

    @classmethod
    def build(cls, lattice: LatticeSet, control, weights=None,
              poly: Polygon | None = None) -> "PatchSpec":
        poly = poly if poly is not None else convex_hull(lattice)
        ctrl = np.array(control, dtype=np.float64)
        if ctrl.ndim != 2 or ctrl.shape[0] != len(lattice) or ctrl.shape[1] not in (2, 3):
            raise ValueError(
                f"control must be ({len(lattice)}, 2|3), got {ctrl.shape}")
        if not np.all(np.isfinite(ctrl)):
            raise ValueError("control points must be finite")
        if weights is None:
            w = np.ones(len(lattice), dtype=np.float64)
        else:
            w = np.array(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != len(lattice):
            raise ValueError("weights must align with the lattice ordering")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ValueError("weights must be strictly positive and finite")
        ctrl.setflags(write=False)
        w.setflags(write=False)
        return cls(lattice, poly, ctrl, w)

    @property
    def dim(self) -> int:
        return int(self.control.shape[1])

    @cached_property
    def domain_diameter(self) -> float:
        return self.poly.diameter

    @cached_property
    def image_diameter(self) -> float:
        lo = self.control.min(axis=0)
        hi = self.control.max(axis=0)
        return float(np.hypot.reduce(hi - lo)) if self.dim == 2 else float(
            math.sqrt(float(((hi - lo) ** 2).sum())))

    @cached_property
    def _vertex_control(self) -> dict[int, np.ndarray]:
        """Hull-vertex index -> control point (for the vertex short circuit)."""
        return {k: self.control[self.lattice.index[v]]
                for k, v in enumerate(self.poly.vertices)}


def _vertex_rows(spec: PatchSpec, H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rows of H sitting at a hull vertex, with the matching vertex index.

    A vertex is where the two adjacent edge inequalities vanish; with clamped
    h values that is exactly a row with >= 2 zeros.
    """
    zeros = H == 0.0
    rows = np.flatnonzero(zeros.sum(axis=1) >= 2)
    verts = np.empty(rows.size, dtype=np.int64)
    l = H.shape[1]
    for out, r in enumerate(rows):
        zk = np.flatnonzero(zeros[r])
        # vertex k lies on edges k-1 and k
        k = int(zk[1]) if (int(zk[0]), int(zk[1])) != (0, l - 1) else 0
        verts[out] = k
    return rows, verts


def eval_patch_many(spec: PatchSpec, pts, basis: np.ndarray | None = None) -> np.ndarray:
    """Evaluate the patch at many points: (N, d) float64.

    ``basis`` may carry a precomputed basis matrix for these points (it does
    not depend on the weights, so weight sweeps can share it).
    """
    H = _basis.clamp_membership(_basis.h_matrix(spec.poly, pts))
    E = _basis.exponent_matrix(spec.poly, spec.lattice)
    B = basis if basis is not None else _basis._basis_from_h(H, E)
    with np.errstate(over="ignore"):  # inf rows fall through to the retry
        wB = B * spec.weights[None, :]
        den = wB.sum(axis=1)
    out = np.empty((H.shape[0], spec.dim), dtype=np.float64)
    ok = np.isfinite(den) & (den >= DEN_UNDERFLOW)  # under- AND overflow retry
    out[ok] = (wB[ok] @ spec.control) / den[ok, None]
    bad = np.flatnonzero(~ok)
    if bad.size:
        # log-domain retry: normalize by the largest weighted log-basis term
        L, zero = _basis.log_basis_from_h(H[bad], E)
        T = np.where(zero, -np.inf, L + np.log(spec.weights)[None, :])
        peak = T.max(axis=1)
        if np.any(~np.isfinite(peak)):
            raise NumericalUnderflow("all basis terms vanished at a domain point")
        S = np.exp(T - peak[:, None])
        out[bad] = (S @ spec.control) / S.sum(axis=1)[:, None]
    # vertex short circuit: avoids any 0/0 ambiguity at hull corners
    rows, verts = _vertex_rows(spec, H)
    for r, k in zip(rows, verts):
        out[r] = spec._vertex_control[int(k)]
    return out


def eval_patch(spec: PatchSpec, p) -> np.ndarray:
    """Evaluate the patch at one domain point; raises OutsideDomain."""
    return eval_patch_many(spec, [tuple(p)])[0]


@dataclass(frozen=True)
class EdgeCurve:
    """Restriction of a patch to one hull edge, as a 1D rational curve.

    The edge is parameterized at unit lattice speed: parameter t in [0, steps]
    maps to ``start + t * direction``.  ``alphas + betas * t`` are the other
    edge inequalities restricted to the edge; together with the exact integer
    ``exponents`` they evaluate the restricted basis without round-off from
    reconstructing 2D points.
    """

    edge_index: int
    start: LatticePoint
    direction: LatticePoint
    steps: int
    params: tuple[int, ...]
    indices: tuple[int, ...]
    control: np.ndarray
    weights: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    exponents: np.ndarray

    def domain_point(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.stack([self.start[0] + t * self.direction[0],
                         self.start[1] + t * self.direction[1]], axis=-1)

    def point_at(self, t) -> np.ndarray:
        """Evaluate the edge curve at parameter(s) t in [0, steps]."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if np.any((t < -1e-9) | (t > self.steps + 1e-9)):
            raise OutsideDomain(f"edge parameter outside [0, {self.steps}]")
        F = self.alphas[None, :] + t[:, None] * self.betas[None, :]
        F[np.abs(F) <= _basis.EPS_MEMBERSHIP] = 0.0
        B = np.prod(F[:, None, :] ** self.exponents[None, :, :], axis=2)
        wB = B * self.weights[None, :]
        img = (wB @ self.control) / wB.sum(axis=1)[:, None]
        return img


def restrict_to_edge(spec: PatchSpec, k: int) -> EdgeCurve:
    """Edge restriction: only the lattice points on edge ``k`` contribute."""
    if not 0 <= k < spec.poly.edge_count:
        raise IndexError(f"edge index {k} out of range")
    idx, params = edge_point_indices(spec.lattice, spec.poly, k)
    start, direction, steps = edge_direction(spec.poly, k)
    others = [i for i in range(spec.poly.edge_count) if i != k]
    alphas = np.array([spec.poly.edges[i](*start) for i in others], dtype=np.float64)
    betas = np.array([spec.poly.edges[i].a * direction[0] +
                      spec.poly.edges[i].b * direction[1] for i in others],
                     dtype=np.float64)
    E = _basis.exponent_matrix(spec.poly, spec.lattice)
    expo = E[np.ix_(idx, others)]
    return EdgeCurve(
        edge_index=k, start=start, direction=direction, steps=steps,
        params=tuple(params), indices=tuple(idx),
        control=spec.control[idx], weights=spec.weights[idx],
        alphas=alphas, betas=betas, exponents=expo)


@dataclass(frozen=True)
class JacobianSampleReport:
    """Finite-difference Jacobian determinant signs on an interior grid.

    A diagnostic, not a certified critical-point test: ``sign_change`` flags
    mixed signs, ``near_zero`` lists sample indices with |det| below
    1e-9 * (image diameter)^2.
    """

    points: np.ndarray        # (N, 2)
    signs: np.ndarray         # (N,) int
    determinants: np.ndarray  # (N,)
    sign_change: bool
    near_zero: tuple[int, ...]
    step: float


def jacobian_sign_samples(spec: PatchSpec, n: int) -> JacobianSampleReport:
    """Sample sign(det DF) on an n x n grid restricted to the strict interior."""
    if spec.dim != 2:
        raise DimensionError("Jacobian sampling requires d = 2")
    x0, y0, x1, y1 = spec.poly.bounding_box
    gx = np.linspace(x0, x1, n)
    gy = np.linspace(y0, y1, n)
    pts = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1).reshape(-1, 2)
    H = _basis.h_matrix(spec.poly, pts)
    pts = pts[np.all(H > JAC_INTERIOR_H, axis=1)]
    base_step = JAC_STEP_FACTOR * spec.domain_diameter
    if pts.shape[0] == 0:
        return JacobianSampleReport(pts, np.empty(0, dtype=int), np.empty(0),
                                    False, (), base_step)
    # keep the FD stencil inside the domain: shrink the step near the boundary
    norms = np.hypot(spec.poly.normal_matrix[:, 0], spec.poly.normal_matrix[:, 1])
    Hin = _basis.h_matrix(spec.poly, pts)
    margin = (Hin / norms[None, :].astype(np.float64)).min(axis=1)
    steps = np.minimum(base_step, 0.45 * margin)
    zeros = np.zeros_like(steps)
    sx = np.stack([steps, zeros], axis=1)
    sy = np.stack([zeros, steps], axis=1)
    stacked = np.concatenate([pts + sx, pts - sx, pts + sy, pts - sy])
    imgs = eval_patch_many(spec, stacked)
    m = pts.shape[0]
    dFx = (imgs[:m] - imgs[m:2 * m]) / (2 * steps[:, None])
    dFy = (imgs[2 * m:3 * m] - imgs[3 * m:]) / (2 * steps[:, None])
    dets = dFx[:, 0] * dFy[:, 1] - dFx[:, 1] * dFy[:, 0]
    signs = np.sign(dets).astype(int)
    tol = JAC_NEAR_ZERO * spec.image_diameter ** 2
    near = tuple(int(i) for i in np.flatnonzero(np.abs(dets) < tol))
    change = bool((signs > 0).any() and (signs < 0).any())
    return JacobianSampleReport(pts, signs, dets, change, near, base_step)
