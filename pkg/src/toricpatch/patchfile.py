"""Patch file format (format_version 1): lattice, controls, weights as JSON.

Control coordinates are plain numbers, or [num, den] integer pairs for exact
rational mode; the whole file must use one style.  Weights default to 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import basis as _basis
from .errors import PatchFileError
from .lattice import LatticeSet
from .patch import PatchSpec

FORMAT_VERSION = 1

Number = float | Fraction


@dataclass(frozen=True)
class PatchFile:
    lattice: LatticeSet
    control: tuple[tuple[Number, ...], ...]
    weights: tuple[float, ...]
    exact: bool

    @property
    def dim(self) -> int:
        return len(self.control[0])

    @cached_property
    def control_floats(self) -> np.ndarray:
        a = np.array([[float(c) for c in row] for row in self.control],
                     dtype=np.float64)
        a.setflags(write=False)
        return a

    def to_spec(self) -> PatchSpec:
        return PatchSpec.build(self.lattice, self.control_floats,
                               np.array(self.weights, dtype=np.float64))

    def with_control(self, control) -> "PatchFile":
        rows = tuple(tuple(c for c in row) for row in control)
        return PatchFile(self.lattice, rows, self.weights, self.exact)


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise PatchFileError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _coordinate(v, where: str) -> Number:
    if isinstance(v, list):
        if len(v) != 2 or not all(isinstance(c, int) and not isinstance(c, bool) for c in v):
            raise PatchFileError(f"{where}: rational coordinates are [num, den] integers")
        if v[1] == 0:
            raise PatchFileError(f"{where}: rational denominator is zero")
        return Fraction(v[0], v[1])
    return _number(v, where)


def parse_patchfile(obj) -> PatchFile:
    """Validate and load a patch-file JSON object.

    Structural problems raise PatchFileError; value-domain problems (duplicate
    lattice points, coordinate overflow, nonpositive weights) raise the
    matching domain errors.
    """
    if not isinstance(obj, dict):
        raise PatchFileError("patch file must be a JSON object")
    if obj.get("format_version") != FORMAT_VERSION:
        raise PatchFileError(
            f"format_version must be {FORMAT_VERSION}, got {obj.get('format_version')!r}")
    lp = obj.get("lattice_points")
    cp = obj.get("control_points")
    if not isinstance(lp, list) or not lp:
        raise PatchFileError("lattice_points must be a non-empty list")
    if not isinstance(cp, list) or len(cp) != len(lp):
        raise PatchFileError("control_points must align with lattice_points")
    for p in lp:
        if not isinstance(p, list) or len(p) != 2 or \
                not all(isinstance(c, int) and not isinstance(c, bool) for c in p):
            raise PatchFileError(f"lattice point {p!r} must be [i, j] integers")
    lattice = LatticeSet.of(lp)  # duplicate / overflow checks live there

    dims = {len(row) if isinstance(row, list) else -1 for row in cp}
    if dims not in ({2}, {3}):
        raise PatchFileError("control points must all be [x, y] or all [x, y, z]")
    control = tuple(tuple(_coordinate(c, f"control_points[{i}]") for c in row)
                    for i, row in enumerate(cp))
    styles = {isinstance(c, Fraction) for row in control for c in row}
    if len(styles) > 1:
        raise PatchFileError("mixing rational and plain control coordinates")
    exact = styles == {True}
    if not exact:
        flat = [c for row in control for c in row]
        if not all(np.isfinite(flat)):
            raise ValueError("control coordinates must be finite")

    wraw = obj.get("weights")
    if wraw is None:
        weights = tuple(1.0 for _ in lp)
    else:
        if not isinstance(wraw, list) or len(wraw) != len(lp):
            raise PatchFileError("weights must align with lattice_points")
        weights = tuple(_number(w, f"weights[{i}]") for i, w in enumerate(wraw))
        if not all(np.isfinite(weights)) or any(w <= 0 for w in weights):
            raise ValueError("weights must be strictly positive and finite")
    return PatchFile(lattice, control, weights, exact)


def serialize_patchfile(pf: PatchFile) -> dict:
    def coord(c):
        if isinstance(c, Fraction):
            return [c.numerator, c.denominator]
        return int(c) if float(c).is_integer() else float(c)

    return {
        "format_version": FORMAT_VERSION,
        "lattice_points": [[int(i), int(j)] for i, j in pf.lattice],
        "control_points": [[coord(c) for c in row] for row in pf.control],
        "weights": [int(w) if float(w).is_integer() else float(w) for w in pf.weights],
    }


def make_tensor(m: int, n: int) -> PatchFile:
    """Identity-control tensor-product patch of bidegree (m, n)."""
    lattice = _basis.tensor_lattice(m, n)
    wmap = _basis.tensor_weights(m, n)
    control = tuple((float(i), float(j)) for i, j in lattice)
    return PatchFile(lattice, control, tuple(float(wmap[p]) for p in lattice), False)


def make_triangle(m: int) -> PatchFile:
    """Identity-control triangular patch of degree m."""
    lattice = _basis.triangle_lattice(m)
    wmap = _basis.triangle_weights(m)
    control = tuple((float(i), float(j)) for i, j in lattice)
    return PatchFile(lattice, control, tuple(float(wmap[p]) for p in lattice), False)
