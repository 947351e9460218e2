"""Exception hierarchy shared across the package.

Every error raised by library code derives from GazefieldError so callers
can catch one base class.  The CLI maps subclasses onto exit codes:
configuration problems exit 2, bad input data exits 3, numerical failures
exit 4.
"""

from __future__ import annotations


class GazefieldError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(GazefieldError):
    """Invalid parameter bundle, config file entry, or unstable scheme setup."""


class ParameterError(ConfigError):
    """A single argument is out of its documented range."""


class DataError(GazefieldError):
    """Input data violates a contract (non-finite values, bad payload)."""


class DimensionError(DataError):
    """Field shapes do not match or a grid is too small for the stencil."""


class PgmParseError(DataError):
    """Malformed PGM payload.  Carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class DomainError(DataError):
    """A continuous position lies outside the field's domain."""


class GridSizeError(DataError):
    """Grid exceeds the documented size limit of a dense routine."""


class NumericalError(GazefieldError):
    """Numerical method failed to produce a usable result."""


class ConvergenceError(NumericalError):
    """Iterative solver stopped above tolerance.  Carries the final residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (final residual {residual:.6e})")
        self.residual = residual


class SingularityError(NumericalError):
    """Per-pixel system is rank deficient.  Carries the first offending pixel."""

    def __init__(self, message: str, pixel: tuple[int, int]):
        super().__init__(f"{message} at pixel (x={pixel[0]}, y={pixel[1]})")
        self.pixel = pixel
