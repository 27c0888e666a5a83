"""Exception hierarchy shared by the library and the CLI."""


class OneBitMusicError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(OneBitMusicError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UsageError(OneBitMusicError, TypeError):
    """An operation was called with incompatible inputs (wrong kind, shape)."""


class NumericError(OneBitMusicError, ArithmeticError):
    """A numerical routine failed to converge or produced non-finite output."""


class ConfigError(OneBitMusicError, ValueError):
    """An experiment configuration is malformed.

    Parameters
    ----------
    path : str
        Dotted path to the offending field, e.g. ``"geometry.element_count"``.
    message : str
        What is wrong with it.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
