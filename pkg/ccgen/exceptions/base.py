"""Base exception classes."""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class CcgenException(Exception):
    """Base exception for ccgen."""

    def __init__(self, detail: str, exit_code: int = EXIT_NUMERIC):
        super().__init__(detail)
        self.detail = detail
        self.exit_code = exit_code


class UsageError(CcgenException):
    """Bad flags, config keys or identifiers."""

    def __init__(self, detail: str = "Invalid usage"):
        super().__init__(detail=detail, exit_code=EXIT_USAGE)


class DataError(CcgenException):
    """Input data could not be read or is inconsistent."""

    def __init__(self, detail: str = "Invalid data"):
        super().__init__(detail=detail, exit_code=EXIT_DATA)


class NumericError(CcgenException):
    """Numeric or degeneracy failure."""

    def __init__(self, detail: str = "Numeric failure"):
        super().__init__(detail=detail, exit_code=EXIT_NUMERIC)


class ConfigError(UsageError):
    """Configuration rejected."""

    def __init__(self, detail: str = "Invalid configuration"):
        super().__init__(detail=detail)
