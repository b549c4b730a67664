"""Exception hierarchy shared by all engines.

Exit-code mapping used by the CLI: ConfigurationError and
PreconditionError terminate with status 2, CorruptionError with status 3.
"""


class CatisoError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(CatisoError):
    """Invalid configuration or malformed input (bad sizes, bad files)."""


class PreconditionError(CatisoError):
    """An operation was called outside its stated precondition."""


class CorruptionError(CatisoError):
    """Internal consistency assertion failed (tape or weight corruption)."""
