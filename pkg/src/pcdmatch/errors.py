"""Exception types raised across the package."""


class PcdMatchError(Exception):
    """Base class for all package-specific errors."""


class ParseError(PcdMatchError):
    """A mesh or map file could not be parsed under its declared format."""


class TopologyError(PcdMatchError):
    """Mesh connectivity/validity violation (bad index, degenerate or
    disconnected mesh)."""


class NumericalError(PcdMatchError):
    """A computation produced non-finite or otherwise invalid numbers."""


class ConvergenceError(PcdMatchError):
    """An iterative solver failed to converge."""


class DegenerateSpectrum(PcdMatchError):
    """Too few usable (positive) eigenvalues for a spectral construction."""


class DimensionMismatch(PcdMatchError):
    """Operands have incompatible shapes."""


class ZeroNormColumn(PcdMatchError):
    """A dictionary column has zero norm and cannot be normalized."""


class RankDeficient(PcdMatchError):
    """Requested more basis atoms than the numerical rank supports."""


class SingularSystem(PcdMatchError):
    """A least-squares system has no usable constraints."""
