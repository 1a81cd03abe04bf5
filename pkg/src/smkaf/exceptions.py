"""Exception hierarchy shared by the filters, data loaders and the CLI."""


class SmkafError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SmkafError, ValueError):
    """Input vectors do not have the expected length."""


class EmptyInputError(SmkafError, ValueError):
    """An operation received an empty collection where data was required."""


class SingularSystemError(SmkafError, ArithmeticError):
    """A regularized Gram system could not be factorized."""


class ConfigError(SmkafError, ValueError):
    """Invalid experiment, series or filter configuration."""


class SeriesParseError(SmkafError, ValueError):
    """A series file contains a line that is not a number."""

    def __init__(self, path, lineno, text):
        self.path = path
        self.lineno = lineno
        self.text = text
        super().__init__(f"{path}:{lineno}: cannot parse {text!r} as a number")
