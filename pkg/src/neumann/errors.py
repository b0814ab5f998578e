"""Exception hierarchy shared by all modules."""


class NeumannError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(NeumannError, ValueError):
    """Array shapes or dimensions do not fit together."""


class DomainError(NeumannError, ValueError):
    """Input lies outside the domain on which an operation is defined."""


class ConstraintError(DomainError):
    """A phase point violates ``|q|=1`` or ``<q,p>=0`` beyond tolerance."""


class FixedPointSetError(DomainError):
    """Point lies on the fixed set ``r = 0`` of the circle action."""


class SingularPotentialError(DomainError):
    """An inverse-square potential term is evaluated at a zero coordinate."""


class IntegrationError(NeumannError, RuntimeError):
    """The constrained step could not solve for its multiplier."""


class NumericalError(NeumannError, ArithmeticError):
    """A numerical procedure failed its internal accuracy check."""
