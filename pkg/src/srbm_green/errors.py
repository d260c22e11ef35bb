"""Exception types raised across the package."""


class SRBMError(Exception):
    pass


class ParameterError(SRBMError, ValueError):
    """Invalid model parameters (covariance, starting point, ...)."""


class DomainError(SRBMError, ValueError):
    """Argument outside the domain where a quantity is defined."""


class TruncationError(SRBMError):
    """Contour truncation cannot meet the requested tolerance."""

    def __init__(self, message, achieved_bound):
        super().__init__(message)
        self.achieved_bound = achieved_bound


class ProximityError(SRBMError):
    """Evaluation point too close to the integration contour."""


class ResolutionError(SRBMError):
    """Sampling too coarse to follow a phase continuously."""


class PoleError(SRBMError, ZeroDivisionError):
    """Evaluation hit a pole (or a removable singularity we refuse to guess)."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ContractError(SRBMError, ValueError):
    """Caller-supplied data violates a documented contract."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ReflectionError(SRBMError):
    """No feasible complementarity solution for a reflection step."""
