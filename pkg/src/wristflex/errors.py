"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code (see cli.EXIT_CODES) so scripted
pipelines can distinguish configuration mistakes from bad data files,
data shortage, and numerical trouble.
"""


class WristflexError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(WristflexError):
    """Invalid or unknown configuration key/value."""


class ParseError(WristflexError):
    """Malformed line in a replay or estimates file."""

    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class OrderingError(WristflexError):
    """Timestamp regression within a single stream."""


class InsufficientDataError(WristflexError):
    """Stream too short for calibration, initialization, or a split."""


class IllConditionedError(WristflexError):
    """A required matrix inverse is numerically unusable."""


class SaturationError(WristflexError):
    """ADC voltage at or above the supply rail; resistance undefined."""


class ModelFormatError(WristflexError):
    """Model container bytes are malformed or truncated."""


class UnsupportedVersionError(ModelFormatError):
    """Model container carries a version this build cannot read."""


class ModelMismatchError(WristflexError):
    """Model input width disagrees with the data frame width."""


class NoEstimatesError(WristflexError):
    """Evaluation requested on an empty estimate set."""
