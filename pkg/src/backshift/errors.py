"""Exception types raised across the package."""


class BackshiftError(Exception):
    """Base class for every error raised by this package."""


class OutOfTable(BackshiftError):
    """A tabulated weight was read past its table with no extension rule."""


class BoundExceeded(BackshiftError):
    """An index set was queried beyond its enumeration bound."""


class ShapeError(BackshiftError):
    """Lengths or exponents of operands do not match."""


class PreconditionError(BackshiftError):
    """Inputs violate the documented preconditions of an operation."""


class InternalError(BackshiftError):
    """A search that is guaranteed to succeed did not; carries a diagnostic dump."""

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump


class Insufficient(BackshiftError):
    """Fewer witnesses were found than requested below the search bound."""

    def __init__(self, message, found):
        super().__init__(message)
        self.found = found


class CannotCertify(BackshiftError):
    """No rigorous tail bound is available for the requested series."""


class ScheduleStuck(BackshiftError):
    """A schedule builder could not complete a level."""

    def __init__(self, level, reason):
        super().__init__(f"level {level}: {reason}")
        self.level = level
        self.reason = reason


class NotInPart(BackshiftError):
    """An index does not belong to the requested partition part."""


class HorizonTooSmall(BackshiftError):
    """The truncation horizon does not cover a required coordinate."""


class NeedDeeperSchedule(BackshiftError):
    """The query refers to levels that have not been built."""


class SearchFailed(BackshiftError):
    """A numeric search ended without an admissible value."""
