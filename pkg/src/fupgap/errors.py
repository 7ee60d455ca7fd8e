"""Exception types shared across the package; the CLI maps them to exit codes."""


class FupgapError(Exception):
    exit_code = 1


class ValidationError(FupgapError, ValueError):
    """Bad input: out-of-domain parameters, empty sets, malformed files."""

    exit_code = 2


class ResourceError(FupgapError, RuntimeError):
    """A size or node budget would be exceeded."""

    exit_code = 3


class GeometryError(FupgapError, RuntimeError):
    """A geometric construction failed its own consistency check."""

    exit_code = 1


class RegularityViolation(FupgapError, ValueError):
    """The set does not behave like a regular set at the claimed constant."""

    exit_code = 2

    def __init__(self, message: str, side: str | None = None):
        super().__init__(message)
        self.side = side
