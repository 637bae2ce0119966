"""Error types shared across the package.

Exit-code mapping for the CLI: ValidationError -> 2, GuardError -> 3,
a verification mismatch -> 1 (no exception, verify reports it).
"""
from __future__ import annotations


class ValidationError(ValueError):
    """Bad user input: unknown family, mixed parity, malformed element, ..."""


class GuardError(RuntimeError):
    """A size guard tripped; rerun with force=True or raise CONGWB_MAX_ELEMENTS."""
