"""Exception types shared across the toolkit.

Anything raised from library code that reflects bad input data or an
unsatisfiable metric precondition derives from ToolkitError, so the CLI
can map it to exit code 1 without string matching.
"""


class ToolkitError(Exception):
    """Base class for all data and metric errors raised by this package."""


class ManifestError(ToolkitError):
    """Malformed or inconsistent corpus manifest.

    Carries the 1-based line number when the problem is tied to a line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmbeddingFormatError(ToolkitError):
    """Bad GSEB payload: wrong magic, version, length, or non-finite data."""


class MetricError(ToolkitError):
    """A metric's precondition does not hold for the supplied data."""
