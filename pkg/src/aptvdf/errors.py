"""Exception types raised across the package."""


class AptVdfError(Exception):
    """Base class for all errors raised by aptvdf."""


class SpecError(AptVdfError, ValueError):
    """A parameter violates a precondition (bad range, bad shape, ...)."""


class DesignError(AptVdfError):
    """Prototype design failed to meet the requested specification."""


class StructureError(AptVdfError, ValueError):
    """The requested filter structure cannot be realized."""


class DomainError(AptVdfError, ValueError):
    """A computed quantity left its valid domain."""


class SearchError(AptVdfError):
    """Word-length search could not reach the target error."""

    def __init__(self, message, best_rmse_db=None):
        super().__init__(message)
        self.best_rmse_db = best_rmse_db


class CoefficientParseError(AptVdfError, ValueError):
    """A coefficient file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NonFiniteInputError(AptVdfError, ValueError):
    """An input sample was NaN or infinite."""

    def __init__(self, index):
        super().__init__(f"non-finite input sample at index {index}")
        self.index = index
