"""Exception hierarchy shared by all modules."""


class SpherewaveError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SpherewaveError, ValueError):
    """A parameter bundle failed its invariants."""


class ContractError(SpherewaveError, ValueError):
    """Inputs are individually valid but incompatible (side, grid or time mismatch)."""


class DomainError(SpherewaveError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class RegimeError(DomainError):
    """The operation is only valid in a parameter regime that was not met."""


class ResolutionError(SpherewaveError, ValueError):
    """The grid does not resolve the requested frequency content."""


class CoverageError(SpherewaveError, ValueError):
    """Sample points fall outside the set covered by a partition of unity."""


class RangeError(SpherewaveError, OverflowError):
    """Floating point overflow or total loss of precision."""
