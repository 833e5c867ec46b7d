"""Exception types shared across the package."""


class CrowdcastError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CrowdcastError):
    """A text record could not be parsed. Carries the 1-based file line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(CrowdcastError):
    """A value violates a domain invariant."""


class ConflictError(CrowdcastError):
    """Duplicate key, e.g. two rows for the same (zone, timestamp)."""


class AlignmentError(CrowdcastError):
    """Input series do not overlap in time."""


class InsufficientDataError(CrowdcastError):
    """Not enough usable rows for the requested operation."""


class SingularDesignError(CrowdcastError):
    """Design matrix is rank deficient. Names the dependent columns."""

    def __init__(self, dependent_columns: list[str]):
        self.dependent_columns = list(dependent_columns)
        super().__init__(
            "design matrix is rank deficient; dependent columns: "
            + ", ".join(self.dependent_columns)
        )


class DegenerateSelectionError(CrowdcastError):
    """Feature filtering removed every column."""


class CoverageError(CrowdcastError):
    """Required timestamps are missing, e.g. exogenous forecast shorter than horizon."""


class ConfigError(CrowdcastError):
    """Invalid configuration file or value."""
