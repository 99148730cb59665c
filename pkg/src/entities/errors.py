"""Exception hierarchy shared by every layer."""


class PolarFloorError(Exception):
    """Base class for all polarfloor errors."""


class ParameterError(PolarFloorError, ValueError):
    """An argument or configuration value is outside its valid range."""


class DataError(PolarFloorError):
    """A stored file is corrupt or does not belong to the code in use."""


class DigestMismatchError(DataError):
    """Code digest stored in a file differs from the active code spec."""


class GridMismatchError(DataError):
    """Two reports that must be compared point-by-point cover different settings."""


class TestSetFormatError(DataError):
    """A test-set file cannot be parsed."""

    __test__ = False  # not a pytest class


class InsufficientStatisticsError(PolarFloorError):
    """A reference measurement observed zero errors, so a ratio is undefined."""
