"""Exception types raised across the package."""


class RgTopoError(Exception):
    """Base class for all package errors."""


class RadiusTooLarge(RgTopoError, ValueError):
    pass


class UnsupportedManifold(RgTopoError, ValueError):
    pass


class UnwrapFailure(RgTopoError):
    pass


class EmptyComplex(RgTopoError, ValueError):
    pass


class NoInteriorComponents(RgTopoError):
    pass


class NoConvergence(RgTopoError, ArithmeticError):
    pass


class MultiplicityMismatch(RgTopoError, AssertionError):
    """Zero-eigenvalue count disagrees with the component count."""


class DimensionMismatch(RgTopoError, ValueError):
    pass


class TooManyEdits(RgTopoError, ValueError):
    pass


class TooLarge(RgTopoError, ValueError):
    pass


class IncompatibleReports(RgTopoError, ValueError):
    pass


class ConfigError(RgTopoError, ValueError):
    pass


class InvariantViolation(RgTopoError, AssertionError):
    """A hard structural identity failed during an experiment."""
