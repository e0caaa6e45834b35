"""Exception hierarchy.

Validation problems derive from :class:`ValidationError` (a ``ValueError``);
numerical failures derive from :class:`NumericalError`.  The command line maps
the two families to distinct exit codes.
"""


class KSProfileError(Exception):
    """Base class for all package errors."""


class ValidationError(KSProfileError, ValueError):
    """Inputs violate a documented precondition."""


class NonPositiveDiffusivity(ValidationError):
    """A diffusivity or the chemotactic sensitivity is not strictly positive."""


class ExponentBelowOne(ValidationError):
    """The effective exponent ``q = alpha + chi/D_u`` is below one."""


class InvalidScaling(ValidationError):
    """No scaling exponent satisfies ``kappa (1 - alpha) = 1 - N/2``."""


class TransformUndefined(ValidationError):
    """The theta transform needs ``q > 1``."""


class InvalidBracket(ValidationError):
    """Both bracket endpoints produce the same trajectory outcome."""


class NoCriticalValue(ValidationError):
    """For ``q = 1`` every shooting parameter gives a global profile."""


class NotGlobal(ValidationError):
    """An operation requiring a global profile received another outcome."""


class WrongRegime(ValidationError):
    """The scaling exponent lies outside the band an operation requires."""


class ExponentOutOfRange(ValidationError):
    """``q`` violates ``1 < q < (N+2)/(N-2)_+``."""


class StencilOutOfDomain(ValidationError):
    """A finite-difference stencil leaves the reconstructable region."""


class OutOfDomain(ValidationError):
    """A radius lies beyond the profile grid and no tail law is available."""


class DomainError(ValidationError):
    """``phi <= 0`` where a positive profile value is required."""


class NumericalError(KSProfileError, ArithmeticError):
    """A numerical procedure failed to reach its target."""


class StepUnderflow(NumericalError):
    """The adaptive step collapsed below ``eps * r``.

    ``partial`` holds the solution up to the failure with an outcome estimated
    from the last trusted step.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class MaxIterExceeded(NumericalError):
    """An iteration budget ran out before the tolerance was met."""


class ToleranceNotReached(NumericalError):
    """An eigenvalue bisection could not reach the requested tolerance."""


class NotConverged(NumericalError):
    """The constrained minimizer stopped before its gradient tolerance.

    ``state`` carries the last iterate.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class DegenerateDenominator(NumericalError):
    """A quotient's denominator vanished or underflowed."""
