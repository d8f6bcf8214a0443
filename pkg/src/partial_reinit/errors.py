"""Exception hierarchy shared across the package."""


class PartialReinitError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PartialReinitError):
    """Invalid schedule, budget or experiment configuration."""


class DomainError(PartialReinitError, ValueError):
    """Operation argument outside its valid domain."""


class NumericError(PartialReinitError):
    """NaN cost, underflow or other numeric breakdown; signals a backend bug."""


class SizeGuardError(DomainError):
    """Brute-force oracle invoked on an instance too large to enumerate."""


class DatasetFormatError(PartialReinitError):
    """Dataset file does not parse under its declared format."""

    def __init__(self, path, line_no, message):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")
