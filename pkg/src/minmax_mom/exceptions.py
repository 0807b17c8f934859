"""Exception hierarchy shared across the package."""


class MomError(Exception):
    """Base class for all package errors."""


class DomainError(MomError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class SolverError(MomError, RuntimeError):
    """The descent-ascent solver could not proceed.

    ``iteration`` holds the iteration index at which the failure occurred,
    or ``None`` when the solver failed before iterating.
    """

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class SelectionError(MomError, RuntimeError):
    """A model-selection procedure produced no admissible choice."""


class NumericError(MomError, ArithmeticError):
    """A numerical routine (quadrature, iteration) failed to converge."""
