"""Exception types shared across the package."""


class ToricError(Exception):
    """Base class for all package-specific errors."""


class DegenerateInput(ToricError):
    """Lattice set has fewer than 3 points or is fully collinear."""


class CoordinateOverflow(ToricError):
    """Lattice coordinate outside the exactness contract (|coord| <= 2**20)."""


class OutsideDomain(ToricError):
    """Evaluation point violates an edge inequality beyond tolerance."""


class NumericalUnderflow(ToricError):
    """Patch denominator underflowed even after the log-domain retry."""


class DimensionError(ToricError):
    """Operation requires planar (d = 2) control points."""


class NotWeaklyCompatible(ToricError):
    """Diagnostic only defined for weakly compatible assignments."""


class InvalidTriangulation(ToricError):
    """Triangle list does not tile the hull or is mis-oriented."""


class PatchFileError(ToricError):
    """Structurally malformed patch file (missing keys, wrong types, bad version)."""


class CertificateDisagreement(ToricError):
    """The sampling oracle contradicted the compatibility certificate.

    Carries the full stress summary in ``.summary``; this always signals a bug
    and is never swallowed by the library itself.
    """

    def __init__(self, message, summary=None):
        super().__init__(message)
        self.summary = summary
