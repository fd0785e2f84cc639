"""Exception types shared across the package."""


class SpecsingError(Exception):
    """Base class for all library errors."""


class SingularAmplitudeError(SpecsingError, ArithmeticError):
    """Raised when a reflection/transmission amplitude (or 1/t) diverges."""


class IncompatibleWavenumberError(SpecsingError, ValueError):
    """Raised when transfer matrices evaluated at different k are combined."""


class UnsupportedCenterError(SpecsingError, ValueError):
    """Raised when a center kind cannot be used in the requested operation."""


class DegenerateGeometryError(SpecsingError, ValueError):
    """Raised when a closed-form design formula has no finite solution."""


class PreconditionError(SpecsingError, ValueError):
    """Raised when an operation is called outside its domain of validity."""


class DomainError(SpecsingError, ValueError):
    """Raised when a wave is evaluated outside the region it is defined on."""


class ResolutionError(SpecsingError, ValueError):
    """Raised when a lattice is too coarse for the wavenumbers of interest."""


class IntegratorError(SpecsingError, ArithmeticError):
    """Raised when the implicit time step cannot be factorised or solved."""
