"""Exception hierarchy shared by every module."""


class HybridADError(Exception):
    """Base class for all errors raised by the package."""


class DataError(HybridADError):
    """Malformed or unusable input data."""


class MissingFile(DataError, FileNotFoundError):
    pass


class RaggedRow(DataError):
    pass


class EmptyCell(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class EmptySample(DataError):
    pass


class DegenerateSplit(HybridADError, ValueError):
    pass


class KTooLarge(HybridADError, ValueError):
    pass


class OneClassOnly(HybridADError, ValueError):
    pass


class DegenerateSubsample(HybridADError):
    pass
