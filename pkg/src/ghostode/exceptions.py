"""Exception hierarchy shared by every ghostode module."""


class GhostODEError(Exception):
    """Base class for all errors raised by ghostode."""


class ExprSyntaxError(GhostODEError):
    """Malformed expression source; ``offset`` is the byte position."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ArityError(ExprSyntaxError):
    pass


class ExprDomainError(GhostODEError, ValueError):
    """Expression evaluated outside its real domain (log of 0, ...)."""


class ConvergenceError(GhostODEError):
    """Adaptive resolution hit the degree cap."""


class IntervalMismatchError(GhostODEError, ValueError):
    pass


class OutOfDomainError(GhostODEError, ValueError):
    pass


class SingularLiftError(GhostODEError):
    """A series division/log/sqrt met a vanishing zeroth coefficient."""


class ResonanceError(GhostODEError):
    """The homogeneous linear problem admits a nontrivial solution."""


class DivergenceError(GhostODEError):
    """Expansion coefficients overflowed for this parameter choice."""


class D2UndefinedError(GhostODEError):
    """g vanishes along the candidate so ``-h/g`` is not defined."""


class CorrectionFailedError(GhostODEError):
    pass


class StallError(GhostODEError):
    """March could not reach the target distance on any admissible step."""


# Errors that mark a parameter point as infeasible during grid scans.
INFEASIBLE = (
    SingularLiftError,
    ResonanceError,
    DivergenceError,
    ConvergenceError,
    D2UndefinedError,
    ExprDomainError,
    FloatingPointError,
    OverflowError,
    ZeroDivisionError,
)


class EmptyGridError(GhostODEError):
    """Every point of a parameter scan was infeasible."""
