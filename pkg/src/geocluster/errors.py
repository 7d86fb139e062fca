"""Shared exception base classes.

Concrete errors live next to the code that raises them; the two bases
exist so the CLI can map failures to exit codes (data problems vs.
numerical failures) without importing every module.
"""


class GeoclusterError(Exception):
    """Base class for all errors raised by this package."""


class DataError(GeoclusterError):
    """Invalid inputs: bad files, out-of-range parameters, mismatched shapes."""


class NumericalError(GeoclusterError):
    """A numerical procedure failed to converge or calibrate."""
