"""Exception hierarchy for floodsight.

Every error derives from ``FloodsightError`` and from the builtin it most
resembles, so callers can catch either.
"""

from __future__ import annotations


class FloodsightError(Exception):
    """Base class for all floodsight errors."""


class InvalidInputError(FloodsightError, ValueError):
    """Raised when an input has the wrong shape, channels or content."""


class AlignmentError(FloodsightError, ValueError):
    """Raised when two rasters cannot be brought onto a common grid."""


class InvalidStatsError(FloodsightError, ValueError):
    """Raised when normalization statistics are unusable (e.g. zero std)."""


class GridParseError(FloodsightError, ValueError):
    """Raised when a USNG/MGRS string cannot be parsed."""


class OutOfDomainError(FloodsightError, ValueError):
    """Raised for coordinates outside the UTM/USNG latitude domain."""


class ConfigError(FloodsightError, ValueError):
    """Raised when a configuration file is missing or malformed."""


class ZipLookupError(FloodsightError, KeyError):
    """Raised when a zip code has no price and no fallback is configured."""


class UnassignedError(FloodsightError, LookupError):
    """Raised when a point lies in no polygon of an index."""


class DivergenceError(FloodsightError, RuntimeError):
    """Raised when training produces a non-finite loss."""


# Errors the CLI reports as validation failures (exit code 2).
VALIDATION_ERRORS = (
    InvalidInputError,
    AlignmentError,
    InvalidStatsError,
    GridParseError,
    OutOfDomainError,
    ConfigError,
    ZipLookupError,
    UnassignedError,
)
