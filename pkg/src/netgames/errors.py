"""Exception types shared across the package."""


class FormatError(ValueError):
    """A network/game file is malformed (bad shape, nonzero diagonal, ...)."""


class NumericFailure(RuntimeError):
    """An iterative or direct numeric routine failed.

    The best available estimate, if any, is attached as ``estimate``.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class PreconditionError(RuntimeError):
    """A documented precondition of an operation does not hold."""


class UnsupportedOperationError(RuntimeError):
    """The operation is not defined for this kind of game."""
