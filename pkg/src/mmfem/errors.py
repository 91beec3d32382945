"""Exception hierarchy shared across the library."""


class MMFemError(Exception):
    """Base class for all library errors."""


class DivisionByZeroDual(MMFemError, ZeroDivisionError):
    """Division by a dual number whose value part is exactly zero."""


class DomainError(MMFemError, ValueError):
    """Evaluation point outside the admissible parameter domain."""


class SingularCollapse(MMFemError, ValueError):
    """Collapsed-coordinate map evaluated where its denominator vanishes."""


class DegenerateCell(MMFemError, ValueError):
    """Cell with (numerically) zero volume."""


class BadIndex(MMFemError, IndexError):
    """Connectivity references a nonexistent vertex or entity."""


class InvalidParam(MMFemError, ValueError):
    """Invalid generator or configuration parameter."""


class ParseError(MMFemError, ValueError):
    """Malformed mesh file; message carries line/field context."""


class UnsupportedDegree(MMFemError, ValueError):
    """Quadrature degree outside the supported range."""


class SingularLimit(MMFemError, ValueError):
    """Material parameter relation with vanishing denominator."""


class SpaceMismatch(MMFemError, ValueError):
    """Incompatible field space / mesh combination."""


class SingularEdge(MMFemError, ValueError):
    """Boundary edge of zero length."""


class DegenerateFace(MMFemError, ValueError):
    """Boundary face of zero area."""


class NotPositiveDefinite(MMFemError, RuntimeError):
    """Reduced system matrix is not symmetric positive definite."""


class NonConvergence(MMFemError, RuntimeError):
    """Iterative solver exceeded its iteration cap."""


class PointOutsideMesh(MMFemError, ValueError):
    """Field evaluation requested outside the meshed domain."""
