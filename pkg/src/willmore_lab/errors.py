"""Exception hierarchy shared by all modules.

Every error carries a stable ``exit_code`` used by the command line front
end: 1 assertion failure, 2 usage, 3 numeric failure, 4 I/O.
"""


class WillmoreLabError(Exception):
    exit_code = 3


class NumericError(WillmoreLabError):
    exit_code = 3


class UsageError(WillmoreLabError):
    exit_code = 2


# meromorphic
class PoleAtPoint(NumericError, ZeroDivisionError):
    pass


class ZeroForm(NumericError):
    pass


class PathHitsPole(NumericError):
    pass


class NoConvergence(NumericError):
    pass


# surface_core
class DegenerateMetric(NumericError):
    pass


class NotConformal(NumericError):
    pass


# weierstrass
class MultiValued(NumericError):
    pass


class NotAPuncture(UsageError):
    pass


class NoRealRoot(NumericError):
    pass


# moebius
class CenterHit(NumericError):
    pass


class CenterOnSurface(NumericError):
    pass


class InconsistentFit(NumericError):
    pass


# quadrature
class DivergentTail(NumericError):
    pass


class AmbiguousQuantum(NumericError):
    pass


# bundle_count
class InconsistentFlags(UsageError):
    pass


class UndeterminedDimension(NumericError):
    """Raised for 0 < c1 < 2g-2, where the dimension table gives no value."""


class EmptyAnsatz(NumericError):
    pass


class OutOfScope(UsageError):
    pass


# flow
class DegenerateTriangle(NumericError):
    pass


class MeshDegenerate(NumericError):
    pass


class StepRejected(NumericError):
    pass


class NoConcentration(NumericError):
    pass


class FitDiverged(NumericError):
    pass


# cli
class ConfigError(UsageError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownKey(ConfigError):
    pass


class BadTolerance(ConfigError):
    pass


# conformal_gauss
class ZeroRadius(UsageError):
    pass
