"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
NumericError -> 3.
"""


class ProxycastError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ProxycastError):
    """Invalid configuration or command-line usage."""


class DataError(ProxycastError):
    """Unreadable, malformed, or inconsistent input data."""


class OfflineError(DataError):
    """A network fetch was required but --offline forbids it."""


class NumericError(ProxycastError):
    """A numeric contract was violated (zero variance, non-finite loss, ...)."""


class ZeroVarianceError(NumericError):
    """A series is constant, so standardization is undefined."""
