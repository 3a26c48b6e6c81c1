"""Library exceptions.

Every error carries a machine-readable code and the process exit status the CLI
should use for it. Engines raise these; the CLI converts them at the command
boundary.
"""

from typing import Any


class HypermixError(Exception):
    """Base exception for all library errors.

    Attributes:
        message: Human-readable error message.
        code: Machine-readable error code.
        exit_code: Process exit status used by the CLI.
        details: Additional context (field paths, offending indices, tables).
    """

    message: str = "An error occurred"
    code: str = "HYPERMIX_ERROR"
    exit_code: int = 1

    def __init__(
        self,
        message: str | None = None,
        code: str | None = None,
        details: dict[str, Any] | None = None,
    ):
        self.message = message or self.__class__.message
        self.code = code or self.__class__.code
        self.details = details or {}
        super().__init__(self.message)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(message={self.message!r}, code={self.code!r})"


# === Input errors ===


class InvalidElementError(HypermixError):
    """Element is not a canonical member of its space."""

    message = "Invalid element"
    code = "INVALID_ELEMENT"


class SpaceMismatchError(HypermixError):
    """Operands belong to different spaces."""

    message = "Operands belong to different spaces"
    code = "SPACE_MISMATCH"


class InvalidArgumentError(HypermixError):
    """Argument outside its admissible range."""

    message = "Invalid argument"
    code = "INVALID_ARGUMENT"


class InvalidAlphaError(InvalidArgumentError):
    """Leading-coefficient scalar must be nonzero."""

    message = "alpha must be nonzero"
    code = "INVALID_ALPHA"


class DescriptorError(HypermixError):
    """Experiment descriptor is malformed."""

    message = "Malformed experiment descriptor"
    code = "MALFORMED_DESCRIPTOR"


class LiteralSyntaxError(HypermixError):
    """Element literal could not be parsed."""

    message = "Malformed element literal"
    code = "LITERAL_SYNTAX"


# === Computation errors ===


class CapacityError(HypermixError):
    """Power iteration exceeded floating-point range."""

    message = "Capacity exceeded"
    code = "CAPACITY_EXCEEDED"


class NoWitnessInRangeError(HypermixError):
    """No certificate found within the scanned index range."""

    message = "No witness in range"
    code = "NO_WITNESS_IN_RANGE"
    exit_code = 2


class InternalCheckError(HypermixError):
    """A built-in regression check disagreed with its closed form."""

    message = "Internal consistency check failed"
    code = "INTERNAL_CHECK"
