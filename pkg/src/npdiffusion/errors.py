"""Exception types raised across the package."""

from __future__ import annotations


class NPDiffusionError(Exception):
    """Base class for all package errors."""


class DomainViolation(NPDiffusionError, ValueError):
    """An argument lies outside the configured domain."""


class InvalidRange(NPDiffusionError, ValueError):
    """A bandwidth search interval is empty or reversed."""


class TopologyUnconnectable(NPDiffusionError, RuntimeError):
    """No connected graph was produced within the retry budget."""


class TruncationExhausted(NPDiffusionError, RuntimeError):
    """Redraw-based truncation to the domain gave up."""


class ZeroMass(NPDiffusionError, ValueError):
    """The kernel mass at the query point is zero."""


class ConfigInvalid(NPDiffusionError, ValueError):
    """A scenario configuration field is missing or out of range."""

    def __init__(self, field: str, reason: str, line: int | None = None):
        self.field = field
        self.reason = reason
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{field}: {reason}{where}")


class IOFailure(NPDiffusionError, OSError):
    """Reading or writing an artifact file failed."""
