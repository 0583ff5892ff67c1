"""Exception hierarchy shared by all qgmaps modules."""


class QGMapsError(Exception):
    """Base class for every error raised by the package."""


class OutOfRange(QGMapsError, ValueError):
    pass


class NegativeDiscriminant(QGMapsError, ValueError):
    pass


class PhaseUnsupported(QGMapsError, ValueError):
    pass


# weights
class SlowConvergence(QGMapsError, RuntimeError):
    def __init__(self, message, achieved_bound=float("nan")):
        super().__init__(message)
        self.achieved_bound = achieved_bound


class DegenerateSeries(QGMapsError, ValueError):
    pass


# maps
class NonPlanar(QGMapsError, ValueError):
    pass


class IncoherentRotation(QGMapsError, ValueError):
    pass


class ParseError(QGMapsError, ValueError):
    pass


class ValidationError(QGMapsError, ValueError):
    def __init__(self, message, index=None):
        super().__init__(message if index is None else f"{message} (index {index})")
        self.index = index


# sampler
class AttemptsExhausted(QGMapsError, RuntimeError):
    pass


class DegenerateWeights(QGMapsError, ValueError):
    pass


class BijectionViolation(QGMapsError, AssertionError):
    pass


class RecursionBudgetExceeded(QGMapsError, RuntimeError):
    pass


# gasket
class InconsistentCrossing(QGMapsError, ValueError):
    pass


class OpenStrand(QGMapsError, ValueError):
    pass


class OddDegree(QGMapsError, ValueError):
    pass


# analysis
class InsufficientData(QGMapsError, ValueError):
    pass


class DegenerateFit(QGMapsError, ValueError):
    pass


class WindowEmpty(QGMapsError, ValueError):
    pass


class InsufficientPairs(QGMapsError, ValueError):
    pass
