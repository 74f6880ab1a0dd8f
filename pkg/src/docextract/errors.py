"""Exception hierarchy. CLI exit codes hang off these classes."""


class ExtractError(Exception):
    """Base class for engine errors."""


class MalformedInputError(ExtractError, ValueError):
    """Input is not parseable bundle syntax."""


class SchemaViolationError(ExtractError, ValueError):
    """Input parses but a field is missing, mistyped or out of range."""


class UnprocessableDocumentError(ExtractError):
    """Document is valid but cannot be processed (e.g. encrypted)."""


class UndefinedIoUError(ValueError):
    pass


class DegenerateRectError(ValueError):
    pass


class NotPartiallyOverlappingError(ValueError):
    pass


class UnresolvableOverlapError(ValueError):
    pass


class InvalidThresholdError(ValueError):
    pass
