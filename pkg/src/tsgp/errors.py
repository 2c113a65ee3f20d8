"""Exception types raised across the package."""


class TsgpError(Exception):
    """Base class for all package errors."""


class NonPositiveDeterminant(TsgpError, ValueError):
    pass


class NotPositiveDefinite(TsgpError, ArithmeticError):
    pass


class OptimizationFailed(TsgpError, RuntimeError):
    pass


class EmptyDataset(TsgpError, ValueError):
    pass


class TooFewPoints(TsgpError, ValueError):
    pass


class CutoffOutOfRange(TsgpError, ValueError):
    pass


class RankDeficient(TsgpError, ArithmeticError):
    pass


class NotIsochoric(TsgpError, ValueError):
    pass


class PathNotAnchored(TsgpError, ValueError):
    pass


class DomainError(TsgpError, ValueError):
    pass


class GentDomainViolation(DomainError):
    pass


class ConfigError(TsgpError, ValueError):
    pass


class ModelFormatError(TsgpError, ValueError):
    pass
