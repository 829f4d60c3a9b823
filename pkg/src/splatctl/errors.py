"""Exception and warning types shared across the toolkit."""

from __future__ import annotations


class SplatctlError(Exception):
    """Base class for all toolkit errors."""


# --- log parsing ---------------------------------------------------------


class ParseError(SplatctlError):
    """Base class for errors raised while reading encoder logs or fixtures."""


class EmptyLog(ParseError):
    """The input contained no frame rows."""


class MissingColumn(ParseError):
    def __init__(self, column: str):
        super().__init__(f"required column missing: {column}")
        self.column = column


class MalformedRow(ParseError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SchemaError(ParseError):
    """A JSON document violated the expected schema. ``path`` locates the value."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# --- scoring -------------------------------------------------------------


class EmptySeries(SplatctlError, ValueError):
    """An operation requiring at least one frame received none."""


class LengthMismatch(SplatctlError, ValueError):
    """Two per-frame sequences that must align have different lengths."""


class NonPositiveTau(SplatctlError, ValueError):
    """Sigmoid scoring requires a strictly positive temperature."""


# --- density control -----------------------------------------------------


class AllZeroScales(SplatctlError, ValueError):
    """Every anchor scale norm is zero, so the median normalizer is undefined."""


class ThresholdOverflowWarning(UserWarning):
    """A modulated pruning threshold exceeded 1 and was clamped."""


# --- masking -------------------------------------------------------------


class DimensionMismatch(SplatctlError, ValueError):
    """Images or masks that must share dimensions do not."""


class DegenerateMaskWarning(UserWarning):
    """Every pixel of a mask was dropped; the masked loss is vacuous."""


# --- simulator -----------------------------------------------------------


class SingularCovariance(SplatctlError):
    """A primitive's covariance is too ill-conditioned to render."""


class PolicyCollapse(SplatctlError):
    """Density control removed every primitive from the scene."""


# --- configuration -------------------------------------------------------


class ConfigError(SplatctlError):
    """A configuration file or flag combination is invalid."""
