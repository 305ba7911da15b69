"""Exception hierarchy shared across the pipeline.

Errors are grouped by the CLI exit code they map to: config (2),
endpoint (3), data (4). Anything else bubbles up as a plain exception.
"""

from __future__ import annotations


class ToolweaveError(Exception):
    """Base class for every error this package raises on purpose."""


class ConfigError(ToolweaveError):
    """Bad or missing configuration (CLI exit code 2)."""


class EndpointError(ToolweaveError):
    """Chat endpoint problems (CLI exit code 3)."""


class RequestFailed(EndpointError):
    """Transport or 5xx failure that survived every retry."""


class ContextTooLong(EndpointError):
    """Entry too large for the converter context; surfaced, never truncated."""


class DataError(ToolweaveError):
    """Malformed input data (CLI exit code 4)."""


class MalformedJson(DataError):
    """A line that does not parse as a JSON object."""


class MissingField(DataError):
    """A required key is absent (or structurally unusable)."""

    def __init__(self, field: str, detail: str = ""):
        self.field = field
        super().__init__(f"missing or invalid field: {field}" + (f" ({detail})" if detail else ""))


class UnknownRole(DataError):
    """A message role outside user/assistant/system."""

    def __init__(self, role: object):
        self.role = role
        super().__init__(f"unknown role: {role!r}")


class UnbalancedTokens(DataError):
    """Special tokens do not pair up: open without close, close without
    open, or nesting."""


class AdapterMismatch(DataError):
    """A source record does not fit the declared adapter schema."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class EmptySample(DataError):
    """Stats requested over zero samples."""
