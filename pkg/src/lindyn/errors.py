"""Exception hierarchy shared by all lindyn modules."""


class LindynError(Exception):
    """Base class for every error raised by lindyn."""


class SpaceMismatchError(LindynError, ValueError):
    """Operands live on different (or differently sized) spaces."""


class LinearDependenceError(LindynError, ValueError):
    """A family that must be linearly independent is not.

    The numerical rank of the family is kept in ``rank``.
    """

    def __init__(self, message, rank):
        super().__init__(message)
        self.rank = rank


class CriterionDataError(LindynError, ValueError):
    """Malformed criterion witness (empty or non-increasing indices, zero scalars...)."""


class WindowViolationError(LindynError):
    """Generator supports are too wide for the requested powers.

    The partially evaluated report is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class GridResolutionError(LindynError):
    """A dyadic grid could not meet a per-term approximation budget."""

    def __init__(self, message, budget, achieved):
        super().__init__(message)
        self.budget = budget
        self.achieved = achieved
