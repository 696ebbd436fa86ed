"""Exception hierarchy.

Data-level problems (bad files, schema or dimension mismatches) derive from
``DataError`` so the command line can map them to a single exit code.
"""


class OdrfError(Exception):
    """Base class for every error raised by this package."""


class DataError(OdrfError, ValueError):
    pass


class MissingColumn(DataError):
    pass


class EmptyDataset(DataError):
    pass


class BadLabel(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class TooFewRows(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class VersionMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class SplitError(OdrfError, ValueError):
    pass


class EmptySide(SplitError):
    pass


class NonBinary(SplitError):
    pass


class NoValidSplit(SplitError):
    pass


class BudgetExceedsData(OdrfError, ValueError):
    pass


class BadTau(OdrfError, ValueError):
    pass


class WrongTask(OdrfError, ValueError):
    pass


class ZeroDenominator(OdrfError, ZeroDivisionError):
    pass


class BadSpec(OdrfError, ValueError):
    pass
