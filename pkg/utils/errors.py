# Exception hierarchy for random convex body computations
# Every error raised by the library derives from KBodyError; input errors are also ValueErrors


class KBodyError(Exception):
    """Base class for all library errors."""


# MARK: Parameter Errors
class InvalidParams(KBodyError, ValueError):
    """A (n, N, ell, q) quadruple violates its invariants."""


class NonIntegerEll(InvalidParams):
    pass


class EllOutOfRange(InvalidParams):
    pass


class QBelowOne(InvalidParams):
    pass


class NonFiniteQ(InvalidParams):
    pass


class NonPositiveDimension(InvalidParams):
    pass


class NonPositiveSampleCount(InvalidParams):
    pass


class KOutOfRange(KBodyError, ValueError):
    pass


class EmptyInput(KBodyError, ValueError):
    pass


class DimensionMismatch(KBodyError, ValueError):
    pass


class NotUnitVector(KBodyError, ValueError):
    pass


class InvalidModel(KBodyError, ValueError):
    """Unknown model variant or an invalid exponent p / scale."""


# MARK: Estimator Errors
class DeltaOutOfRange(KBodyError, ValueError):
    pass


class InsufficientSamples(KBodyError, ValueError):
    pass


class DivisionByZero(KBodyError, ZeroDivisionError):
    pass


# MARK: Orlicz Errors
class OutOfRange(KBodyError, ValueError):
    pass


class IntegrationFailure(KBodyError, ArithmeticError):
    pass


class NoFiniteBracket(KBodyError, ArithmeticError):
    pass


class UnboundedConjugate(KBodyError, ArithmeticError):
    pass


class NotOrliczFunction(KBodyError, ValueError):
    pass


# MARK: Predictor Errors
class QOutOfRegime(KBodyError, ValueError):
    pass


class TBelowOne(KBodyError, ValueError):
    pass


# MARK: Experiment Errors
class ConfigInvalid(KBodyError, ValueError):
    pass


class UnknownSuite(KBodyError, ValueError):
    pass


class PersistenceError(KBodyError, OSError):
    """Writing results failed after all retries."""
