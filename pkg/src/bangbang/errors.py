"""Exception types raised by the solver."""


class BangBangError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(BangBangError, ValueError):
    """Raised when arc or problem data violate their invariants."""


class DomainError(BangBangError, ValueError):
    """Raised when a function is evaluated outside its definition domain."""


class ConvergenceError(BangBangError, RuntimeError):
    """Raised when an iterative method fails to converge."""


class InfeasibleProblemError(BangBangError, ValueError):
    """Raised by ``solve`` when the boundary data admit no bang-bang profile."""

    def __init__(self, message, feasibility=None):
        super().__init__(message)
        self.feasibility = feasibility


class NoCrossingError(BangBangError, RuntimeError):
    """Raised when the acceleration and braking curves do not intersect."""
