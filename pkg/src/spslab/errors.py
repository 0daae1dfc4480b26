"""Exception hierarchy shared by all spslab modules."""


class SPSError(Exception):
    """Base class for every error raised by spslab."""


class ZeroField(SPSError, ValueError):
    pass


class ResolutionError(SPSError, ValueError):
    pass


class GeometryError(SPSError, ValueError):
    pass


class FormatError(SPSError, ValueError):
    pass


class GridMismatch(SPSError, ValueError):
    pass


class ExponentOutOfRange(SPSError, ValueError):
    pass


class OutOfRange(SPSError, ValueError):
    pass


class DegenerateField(SPSError, ValueError):
    pass


class NonFinite(SPSError, FloatingPointError):
    """Raised when a descent step produces NaN/inf values."""


class MissingRho(SPSError, KeyError):
    pass


class ConfigError(SPSError, ValueError):
    pass
