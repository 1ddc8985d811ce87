"""Exception hierarchy.

Exceptions are grouped by the CLI exit code they map to: ``UsageError`` (1),
``DataError`` (2) and ``NumericError`` (3).
"""


class GwofiError(Exception):
    exit_code = 3


class UsageError(GwofiError):
    exit_code = 1


class ConfigError(UsageError):
    pass


class DataError(GwofiError):
    exit_code = 2


class SchemaMismatchError(DataError):
    pass


class ParseError(DataError):
    pass


class UnimputableColumnError(DataError):
    pass


class OutOfRangeError(DataError):
    pass


class LeakageError(DataError):
    pass


class NumericError(GwofiError):
    exit_code = 3


class UndefinedSupportError(NumericError):
    pass


class CountConsistencyError(NumericError):
    pass


class FitnessDomainError(NumericError):
    pass


class DegenerateLabelsError(NumericError):
    pass


class EmptyNodeError(NumericError):
    pass


class DimensionMismatchError(NumericError):
    pass


class UndefinedAurocError(NumericError):
    pass


class SplitError(NumericError):
    pass
