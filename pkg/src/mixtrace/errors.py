"""Exception types shared across the package."""

from __future__ import annotations


class MixtraceError(Exception):
    """Base class for all package errors."""


class DomainError(MixtraceError, ValueError):
    """A parameter lies outside the range where an operation is defined."""


class NumericError(MixtraceError, ArithmeticError):
    """A quadrature sample or intermediate value was not finite."""


class ConfigError(MixtraceError, ValueError):
    """A run configuration could not be parsed or validated."""
