"""Deterministic SVG rendering of a planar patch.

Three layers: the image of the hull boundary (edge restriction curves), iso-
parameter curves of the domain grid, and the control points with the boundary
control polygon.  Output is a pure function of the inputs.
"""
from __future__ import annotations

import numpy as np

from . import basis as _basis
from .errors import DimensionError
from .lattice import edge_point_indices
from .patch import eval_patch_many, restrict_to_edge
from .patchfile import PatchFile

CURVE_SAMPLES = 96


def _fmt(v: float) -> str:
    return f"{v:.8g}"


def _polyline(points: np.ndarray, style: str) -> str:
    coords = " ".join(f"{_fmt(x)},{_fmt(-y)}" for x, y in points)
    return f'<polyline fill="none" {style} points="{coords}"/>'


def _iso_segments(poly, axis: int, value: float) -> tuple[float, float] | None:
    """Clip the line {x = value} (axis 0) or {y = value} (axis 1) to the hull."""
    lo, hi = -np.inf, np.inf
    for e in poly.edges:
        fixed = e.a * value if axis == 0 else e.b * value
        free = e.b if axis == 0 else e.a
        if free == 0:
            if fixed + e.c < 0:
                return None
            continue
        bound = -(fixed + e.c) / free
        if free > 0:
            lo = max(lo, bound)
        else:
            hi = min(hi, bound)
    if hi - lo <= 1e-12:
        return None
    return lo, hi


def render_svg(pf: PatchFile, grid: int = 12) -> str:
    """Render the patch image as layered SVG; planar patches only."""
    if pf.dim != 2:
        raise DimensionError("rendering supports d = 2 only")
    spec = pf.to_spec()
    poly = spec.poly

    boundary = []
    for k in range(poly.edge_count):
        curve = restrict_to_edge(spec, k)
        ts = np.linspace(0.0, float(curve.steps), CURVE_SAMPLES)
        boundary.append(curve.point_at(ts))

    isocurves = []
    x0, y0, x1, y1 = poly.bounding_box
    for axis, (lo, hi) in ((0, (x0, x1)), (1, (y0, y1))):
        for value in np.linspace(lo, hi, grid + 2)[1:-1]:
            span = _iso_segments(poly, axis, float(value))
            if span is None:
                continue
            s = np.linspace(span[0], span[1], CURVE_SAMPLES)
            pts = np.stack([np.full_like(s, value), s] if axis == 0 else
                           [s, np.full_like(s, value)], axis=1)
            H = _basis.h_matrix(poly, pts)
            pts = pts[np.all(H >= -_basis.EPS_MEMBERSHIP, axis=1)]
            if len(pts) >= 2:
                isocurves.append(eval_patch_many(spec, pts))

    # boundary control polygon: hull lattice points in cycle order
    ring = []
    for k in range(poly.edge_count):
        idx, _ = edge_point_indices(spec.lattice, poly, k)
        ring.extend(idx[:-1])
    ring.append(ring[0])
    net = spec.control[ring]

    everything = np.concatenate(boundary + isocurves + [spec.control])
    lo = everything.min(axis=0)
    hi = everything.max(axis=0)
    margin = 0.05 * max(float(hi[0] - lo[0]), float(hi[1] - lo[1]), 1e-9)
    vx, vy = lo[0] - margin, -(hi[1] + margin)
    vw = hi[0] - lo[0] + 2 * margin
    vh = hi[1] - lo[1] + 2 * margin
    r = 0.012 * max(vw, vh)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(vx)} {_fmt(vy)} '
        f'{_fmt(vw)} {_fmt(vh)}">',
        '<g id="isocurves">',
        *(_polyline(c, 'stroke="#9aa4b2" stroke-width="{0}"'.format(_fmt(0.25 * r)))
          for c in isocurves),
        '</g>',
        '<g id="boundary">',
        *(_polyline(c, 'stroke="#1f77b4" stroke-width="{0}"'.format(_fmt(0.6 * r)))
          for c in boundary),
        '</g>',
        '<g id="controls">',
        _polyline(net, 'stroke="#444444" stroke-width="{0}"'.format(_fmt(0.45 * r))),
        *(f'<circle cx="{_fmt(x)}" cy="{_fmt(-y)}" r="{_fmt(r)}" fill="#d62728"/>'
          for x, y in spec.control),
        '</g>',
        '</svg>',
    ]
    return "\n".join(out) + "\n"
