"""Exception types shared across the package."""


class MiopError(Exception):
    """Base class for all package errors."""


class RangeError(MiopError, ValueError):
    """Parameters violate the admissible range of a family."""


class PoleError(MiopError, ArithmeticError):
    """A gamma function was evaluated at a pole."""


class DivideByZero(MiopError, ZeroDivisionError):
    """A lower series parameter produced a vanishing denominator."""


class NonTerminating(MiopError, ValueError):
    """A series was requested that has no terminating upper parameter."""


class PositivityViolation(MiopError, ValueError):
    """The denominator polynomial is not positive on the lattice."""


class DegreeMismatch(MiopError, AssertionError):
    """A polynomial does not have the expected degree or leading coefficient."""


class ZeroCountMismatch(MiopError, AssertionError):
    """A polynomial has the wrong number of sign changes on the lattice."""


class UnsupportedFamily(MiopError, ValueError):
    """The requested construction is not available for this family."""


class NotApplicable(MiopError, ValueError):
    """The requested property does not hold for this family."""


class TimeScaleTooLarge(MiopError, ValueError):
    """The discrete-time step makes a transition probability invalid."""


class TuningInfeasible(MiopError, ValueError):
    """No weights make the repeated generator a valid birth and death matrix."""


class ConvergenceFailure(MiopError, RuntimeError):
    """An iterative eigensolver hit its sweep cap."""


class DimensionMismatch(MiopError, ValueError):
    """A vector does not match the lattice it is paired with."""
