"""Error taxonomy shared across the toolkit.

Domain failures (bad sequences, broken preconditions, failed verification)
raise ValidationError subclasses and map to CLI exit code 2.  Malformed
files or directories raise FormatError and map to exit code 3.
"""

from __future__ import annotations


class CarpenterError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(CarpenterError):
    """A domain precondition or invariant failed."""


class RegimeError(ValidationError):
    """A declared tail regime is inconsistent with the window data."""


class WindowError(ValidationError):
    """The requested window cannot be served by the given prefixes."""


class BracketingError(ValidationError):
    """A two-by-two solve was attempted outside its bracketing interval."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class FormatError(CarpenterError):
    """An artifact file or configuration is malformed."""
