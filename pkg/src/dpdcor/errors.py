"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, data problems with 3, protocol and transport problems with 4.
"""


class DpdcorError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(DpdcorError, ValueError):
    """Invalid parameter or configuration value."""


class BudgetError(ConfigError):
    """Privacy budget outside its valid domain (epsilon <= 0, delta not in [0, 1/2), ...)."""


class PartitionError(ConfigError):
    """Row partition infeasible, e.g. a disjoint block would fall below 4 rows."""


class DataError(DpdcorError, ValueError):
    """Problem with user data: wrong shape, too few rows, non-numeric or non-finite values."""


class ProtocolError(DpdcorError, RuntimeError):
    """Malformed, out-of-order, or inconsistent protocol message sequence."""


class DecodeError(ProtocolError):
    """A wire line could not be parsed into a valid protocol message."""


class TransportError(ProtocolError):
    """The underlying byte stream failed mid-session.

    Carries the last successfully completed protocol phase (if known) so a
    diagnostic can say how far the session got.
    """

    def __init__(self, message: str, phase: str | None = None):
        super().__init__(message)
        self.phase = phase


def exit_code_for(exc: BaseException) -> int:
    """Process exit code for an exception per the CLI taxonomy.

    2 for configuration errors, 3 for data errors, 4 for protocol or
    transport errors, 1 for anything else.
    """
    if isinstance(exc, ConfigError):
        return 2
    if isinstance(exc, DataError):
        return 3
    if isinstance(exc, ProtocolError):
        return 4
    return 1
