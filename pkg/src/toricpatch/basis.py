"""Toric Bernstein basis evaluation and the classical weight systems.

The basis attached to lattice point ``a`` is the product of the hull's edge
inequalities raised to their exact integer values at ``a``:

    beta_a(x) = h_1(x)**h_1(a) * ... * h_l(x)**h_l(a)

with the convention 0**0 = 1, which is what makes vertex interpolation exact.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import OutsideDomain
from .lattice import LatticePoint, LatticeSet, Polygon

# Absolute slack on the edge inequalities for domain membership.
EPS_MEMBERSHIP = 1e-12
# Switch a row to log-domain products beyond this exponent, or when a factor
# with positive exponent gets this close to zero; avoids intermediate
# underflow for high-degree patches without slowing the common case.
LOG_PATH_EXPONENT = 40
LOG_PATH_SMALL_H = 1e-8


def h_matrix(poly: Polygon, pts) -> np.ndarray:
    """Edge inequality values, one row per point: (N, l) float64."""
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    return pts @ poly.normal_matrix.T.astype(np.float64) + poly.offsets.astype(np.float64)


def exponent_matrix(poly: Polygon, s: LatticeSet) -> np.ndarray:
    """Exact integer exponents h_i(a): (n, l) int64."""
    return s.array @ poly.normal_matrix.T + poly.offsets[None, :]


def clamp_membership(H: np.ndarray, eps: float = EPS_MEMBERSHIP) -> np.ndarray:
    """Snap |h| <= eps to exactly 0 and reject anything below -eps."""
    if np.any(H < -eps):
        i, k = np.unravel_index(int(np.argmin(H)), H.shape)
        raise OutsideDomain(
            f"point index {i}: edge inequality {k} = {H[i, k]:.3e} < -{eps:.0e}")
    H = H.copy()
    H[np.abs(H) <= eps] = 0.0
    return H


def _basis_from_h(H: np.ndarray, E: np.ndarray) -> np.ndarray:
    """beta matrix (N, n) from clamped h values and integer exponents.

    Extreme degrees can overflow individual beta values to inf; that is
    expected and handled by the patch evaluator's normalized retry, so the
    overflow warning is silenced here.
    """
    with np.errstate(over="ignore"):
        if E.max(initial=0) > LOG_PATH_EXPONENT:
            L, zero = log_basis_from_h(H, E)
            return np.where(zero, 0.0, np.exp(L))
        B = np.prod(H[:, None, :] ** E[None, :, :], axis=2)
        small = (H > 0.0) & (H < LOG_PATH_SMALL_H)
        if small.any():
            live = (E > 0).any(axis=0)  # edges that actually appear with positive exponent
            rows = np.flatnonzero((small & live[None, :]).any(axis=1))
            if rows.size:
                L, zero = log_basis_from_h(H[rows], E)
                B[rows] = np.where(zero, 0.0, np.exp(L))
    return B


def log_basis_from_h(H: np.ndarray, E: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log(beta) matrix plus a mask of exact zeros (h = 0 with exponent > 0)."""
    pos = H > 0.0
    logH = np.where(pos, np.log(np.where(pos, H, 1.0)), 0.0)
    L = logH @ E.T.astype(np.float64)
    zero = ((~pos).astype(np.float64) @ (E.T > 0).astype(np.float64)) > 0.0
    return L, zero


def basis_matrix(poly: Polygon, s: LatticeSet, pts) -> np.ndarray:
    """Evaluate every beta_a at every point: (N, n) float64, rows >= 0."""
    H = clamp_membership(h_matrix(poly, pts))
    return _basis_from_h(H, exponent_matrix(poly, s))


def eval_basis(poly: Polygon, s: LatticeSet, p) -> np.ndarray:
    """beta_a(p) for every a in lattice order; raises OutsideDomain."""
    return basis_matrix(poly, s, [p])[0]


def tensor_lattice(m: int, n: int) -> LatticeSet:
    """Integer points of the m x n rectangle, lexicographic order."""
    if m < 1 or n < 1:
        raise ValueError("tensor degrees must be >= 1")
    return LatticeSet.of((i, j) for i in range(m + 1) for j in range(n + 1))


def tensor_weights(m: int, n: int) -> dict[LatticePoint, int]:
    """Binomial-product weights that recover the tensor-product patch."""
    if m < 1 or n < 1:
        raise ValueError("tensor degrees must be >= 1")
    return {(i, j): math.comb(m, i) * math.comb(n, j)
            for i in range(m + 1) for j in range(n + 1)}


def triangle_lattice(m: int) -> LatticeSet:
    """Integer points of the degree-m triangle, lexicographic order."""
    if m < 1:
        raise ValueError("triangle degree must be >= 1")
    return LatticeSet.of((i, j) for i in range(m + 1) for j in range(m - i + 1))


def triangle_weights(m: int) -> dict[LatticePoint, int]:
    """Multinomial weights that recover the triangular patch."""
    if m < 1:
        raise ValueError("triangle degree must be >= 1")
    return {(i, j): math.factorial(m) // (math.factorial(i) * math.factorial(j) * math.factorial(m - i - j))
            for i in range(m + 1) for j in range(m - i + 1)}


def weights_array(s: LatticeSet, mapping: dict[LatticePoint, float]) -> np.ndarray:
    """Align a per-point weight map with the lattice ordering."""
    return np.array([float(mapping[p]) for p in s], dtype=np.float64)
