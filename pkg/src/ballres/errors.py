"""Exception types raised across the package."""


class BallresError(Exception):
    """Base class for all package errors."""


class NonConvergence(BallresError):
    """Root iteration hit its iteration cap.

    The best iterate is kept on ``best`` so callers can inspect it.
    """

    def __init__(self, message, best=None, iterations=0):
        super().__init__(message)
        self.best = best
        self.iterations = iterations


class ContourTooClose(BallresError):
    pass


class PoleAtResonance(BallresError):
    pass


class FactorPole(BallresError):
    pass


class TruncationNotReached(BallresError):
    pass


class PhaseUnwrapFailure(BallresError):
    pass


class QuadratureStall(BallresError):
    pass


class IllConditioned(BallresError):
    pass


class DegenerateProfile(BallresError):
    pass


class NonPositiveInvariant(BallresError):
    pass


class CalibrationMissing(BallresError):
    pass
