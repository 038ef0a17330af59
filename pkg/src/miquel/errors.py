"""Exception hierarchy shared by every module of the package."""


class MiquelError(Exception):
    """Base class for all library errors."""


# projective arithmetic
class IllDefinedMultiRatio(MiquelError):
    pass


class OddLength(MiquelError):
    pass


class DeterminantError(MiquelError):
    pass


# circle geometry
class InfinitePoint(MiquelError):
    pass


class NotOnBothCircles(MiquelError):
    pass


class CoincidentCenters(MiquelError):
    pass


class CollinearPoints(MiquelError):
    pass


class CoincidentPoints(MiquelError):
    pass


class DegenerateLine(MiquelError):
    pass


class CircleThroughInfinity(MiquelError):
    pass


class InvalidCircle(MiquelError):
    pass


# lattice
class ParityError(MiquelError):
    pass


# engine
class NoCommonPoint(MiquelError):
    pass


class DisjointCircles(MiquelError):
    pass


class MiquelResidualExceeded(MiquelError):
    def __init__(self, site, residual, tol):
        super().__init__(f"Miquel residual {residual:.3e} exceeds {tol:.1e} at octahedron {site}")
        self.site = site
        self.residual = residual


class DegenerateOctahedron(MiquelError):
    def __init__(self, site, reason="collinear centers"):
        super().__init__(f"degenerate octahedron {site}: {reason}")
        self.site = site


class WindowExhausted(MiquelError):
    pass


class LayerNotCovered(MiquelError):
    pass


# variables
class MissingData(MiquelError):
    pass


class ZeroDenominator(MiquelError):
    pass


class SingularRecurrence(MiquelError):
    pass


# reconstruction
class SingularSolve(MiquelError):
    pass


class InconsistentBoundary(MiquelError):
    pass


class ConcyclicityViolated(MiquelError):
    def __init__(self, site, residual):
        super().__init__(f"points around vertex {site} are not concyclic (residual {residual:.3e})")
        self.site = site
        self.residual = residual


# generators
class RetryExhausted(MiquelError):
    pass


class DegenerateRhombus(MiquelError):
    pass


class FoldedQuad(MiquelError):
    pass


class PoleInsidePattern(MiquelError):
    pass


# verification / io
class WindowTooSmall(MiquelError):
    pass


class SchemaViolation(MiquelError):
    def __init__(self, pointer, message):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


class UnsupportedVersion(MiquelError):
    pass
