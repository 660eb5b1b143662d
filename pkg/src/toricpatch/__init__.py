"""Toric Bezier patches on lattice polygons, with an injectivity certificate.

Evaluates rational patches over the convex hull of any planar lattice set and
decides, from the control points alone, whether the patch is injective for
every choice of positive weights.
"""

__version__ = "0.1.0"

from .basis import (basis_matrix, eval_basis, tensor_lattice, tensor_weights,
                    triangle_lattice, triangle_weights, weights_array)
from .compatibility import (CompatibilityReport, HalfspaceReport, OrientedTriple,
                            PLMapReport, VertexImageCollision, check_compatible,
                            check_weak, default_triangulation,
                            halfspace_diagnostic, pl_map_check,
                            randomized_triangulation)
from .errors import (CertificateDisagreement, CoordinateOverflow,
                     DegenerateInput, DimensionError, InvalidTriangulation,
                     NotWeaklyCompatible, NumericalUnderflow, OutsideDomain,
                     PatchFileError, ToricError)
from .lattice import (EdgeInequality, LatticePoint, LatticeSet, PointTag,
                      Polygon, classify, convex_hull, edge_point_indices,
                      hull_vertex_indices, orient_lattice)
from .oracle import (CollisionPair, CollisionReport, SampleCloud, StressSummary,
                     find_collisions, random_weights, sample_patch,
                     stress_certificate)
from .patch import (EdgeCurve, JacobianSampleReport, PatchSpec, eval_patch,
                    eval_patch_many, jacobian_sign_samples, restrict_to_edge)
from .patchfile import (PatchFile, make_tensor, make_triangle, parse_patchfile,
                        serialize_patchfile)
from .render import render_svg

__all__ = [
    "__version__",
    "LatticePoint", "LatticeSet", "EdgeInequality", "Polygon", "PointTag",
    "convex_hull", "orient_lattice", "classify", "hull_vertex_indices",
    "edge_point_indices",
    "eval_basis", "basis_matrix", "tensor_lattice", "tensor_weights",
    "triangle_lattice", "triangle_weights", "weights_array",
    "PatchSpec", "EdgeCurve", "JacobianSampleReport", "eval_patch",
    "eval_patch_many", "restrict_to_edge", "jacobian_sign_samples",
    "CompatibilityReport", "OrientedTriple", "VertexImageCollision",
    "HalfspaceReport", "PLMapReport", "check_weak", "check_compatible",
    "halfspace_diagnostic", "pl_map_check", "default_triangulation",
    "randomized_triangulation",
    "SampleCloud", "CollisionPair", "CollisionReport", "StressSummary",
    "sample_patch", "find_collisions", "random_weights", "stress_certificate",
    "PatchFile", "parse_patchfile", "serialize_patchfile", "make_tensor",
    "make_triangle", "render_svg",
    "ToricError", "DegenerateInput", "CoordinateOverflow", "OutsideDomain",
    "NumericalUnderflow", "DimensionError", "NotWeaklyCompatible",
    "InvalidTriangulation", "PatchFileError", "CertificateDisagreement",
]
