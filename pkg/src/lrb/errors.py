"""Exception hierarchy shared by the whole package.

Every error raised on purpose by this library derives from :class:`LrbError`,
so callers (including the CLI) can distinguish "you asked for something
meaningless" from "the model cannot do that" from "the numerics gave up".
"""

from __future__ import annotations


class LrbError(Exception):
    """Base class for all library errors."""


class DomainError(LrbError, ValueError):
    """An argument lies outside the mathematical domain of the operation.

    Examples: a non-increasing time pair ``s >= t``, a bridge evaluated past
    its horizon, conditioning on a value the terminal law cannot produce.
    """


class ConfigError(LrbError, ValueError):
    """A configuration object or file is malformed or inconsistent."""


class UnsupportedRegimeError(LrbError):
    """The request is meaningful but this implementation cannot honour it.

    Raised when a documented validity condition fails, e.g. a closed form
    that only exists for certain parameter ranges.
    """


class NumericError(LrbError):
    """A numerical routine failed to reach its target accuracy.

    Carries a ``diagnostics`` dict with whatever the routine knew at the
    point of failure (partial sums, iteration counts, bracketing intervals).
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
