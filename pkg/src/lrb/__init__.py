"""Levy random bridges: path-space models, pricing, and claims reserving."""

from .errors import (
    ConfigError,
    DomainError,
    LrbError,
    NumericError,
    UnsupportedRegimeError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "LrbError",
    "NumericError",
    "UnsupportedRegimeError",
    "__version__",
]
