"""Exception hierarchy shared by every module of :mod:`lklab`."""


class LklabError(Exception):
    """Base class for all errors raised by the package."""


class InvalidInputError(LklabError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(LklabError, ValueError):
    """A point lies outside the domain of a conformal map or kernel."""


class NumericError(LklabError, ArithmeticError):
    """A numerical procedure failed or produced an untrustworthy result."""


class InfeasibleError(LklabError, ValueError):
    """An optimization problem has no feasible point."""


class InternalError(LklabError, RuntimeError):
    """A state that valid inputs can never produce was reached."""
