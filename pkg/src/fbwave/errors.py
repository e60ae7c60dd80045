"""Exception hierarchy for fbwave."""

__all__ = [
    "FbwaveError",
    "NonPositiveParam",
    "UnresolvedRoots",
    "ExistenceRefused",
    "CollinearityFailed",
    "ChordFailed",
    "NotConstantSign",
    "OutsideWindow",
    "NonPositiveSigma",
    "BadOrdering",
    "ConditionsNotMet",
    "QuadratureDivergence",
    "StiffnessFailure",
    "NegativeXi1",
    "SlopeAssumptionViolated",
    "OrderingViolated",
    "ConfigError",
]


class FbwaveError(Exception):
    """Base class for all fbwave errors."""


class NonPositiveParam(FbwaveError, ValueError):
    pass


class UnresolvedRoots(FbwaveError):
    pass


class ExistenceRefused(FbwaveError):
    """A wavefront does not exist for the requested end states."""


class CollinearityFailed(ExistenceRefused):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class ChordFailed(ExistenceRefused):
    def __init__(self, message, margins, segment=None):
        super().__init__(message)
        self.margins = margins
        self.segment = segment


class NotConstantSign(FbwaveError):
    pass


class OutsideWindow(ExistenceRefused):
    def __init__(self, message, failed):
        super().__init__(message)
        self.failed = list(failed)


class NonPositiveSigma(FbwaveError, ValueError):
    pass


class BadOrdering(FbwaveError, ValueError):
    pass


class ConditionsNotMet(ExistenceRefused):
    def __init__(self, message, failed):
        super().__init__(message)
        self.failed = list(failed)


class QuadratureDivergence(FbwaveError):
    """The tail integral does not converge: the end is approached asymptotically."""


class StiffnessFailure(FbwaveError):
    def __init__(self, message, xi, phi):
        super().__init__(message)
        self.xi = xi
        self.phi = phi


class NegativeXi1(FbwaveError, ValueError):
    pass


class SlopeAssumptionViolated(FbwaveError):
    pass


class OrderingViolated(FbwaveError):
    def __init__(self, message, xi, eps1, eps2):
        super().__init__(message)
        self.xi = xi
        self.eps1 = eps1
        self.eps2 = eps2


class ConfigError(FbwaveError, ValueError):
    pass
