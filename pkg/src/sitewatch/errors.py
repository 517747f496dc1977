"""Exception hierarchy.

The CLI maps ``ConfigError`` to exit code 2 and every other
``SitewatchError`` to exit code 1.
"""


class SitewatchError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SitewatchError):
    pass


class ParseError(SitewatchError):
    """A frame line is not well-formed JSON (or not a JSON object)."""

    def __init__(self, message, offset=None, line=None):
        self.reason = message
        self.offset = offset
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class ValidationError(SitewatchError):
    """A frame record parsed but violates a field invariant."""

    def __init__(self, field, message, line=None):
        self.field = field
        self.reason = message
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{field}: {message}")


class StreamError(SitewatchError):
    def __init__(self, previous_id, frame_id, line=None):
        self.previous_id = previous_id
        self.frame_id = frame_id
        self.line = line
        at = f" at line {line}" if line is not None else ""
        super().__init__(
            f"frame_id {frame_id}{at} does not increase on previous frame_id {previous_id}"
        )


class DesignError(SitewatchError):
    """Static evaluation points do not form a complete distance x angle grid."""

    def __init__(self, message, missing=()):
        self.missing = tuple(missing)
        if self.missing:
            cells = ", ".join(f"{d} m/{a} deg" for d, a in self.missing)
            message = f"{message}; missing cells: {cells}"
        super().__init__(message)


class UndefinedMetricError(SitewatchError, ValueError):
    pass
