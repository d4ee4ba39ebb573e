"""Exception hierarchy shared by all stablequad modules."""


class StableQuadError(Exception):
    """Base class for library errors."""


class InvalidArgument(StableQuadError, ValueError):
    """A precondition on an argument was violated."""


class EvaluationError(StableQuadError, ArithmeticError):
    """A weight or test function returned a non-finite value."""


class DegeneracyError(StableQuadError, ArithmeticError):
    """Gram-Schmidt hit a (numerically) linearly dependent column."""


class NumericalError(StableQuadError, ArithmeticError):
    """An iterative routine failed to converge."""


class NnlsConvergenceError(NumericalError):
    """Lawson-Hanson stalled; ``solution`` holds the best iterate found."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class SearchFailure(StableQuadError):
    """A minimal-N scan reached its cap without meeting the criterion."""

    def __init__(self, message, profile=None):
        super().__init__(message)
        self.profile = profile if profile is not None else []
