"""Exception and warning types shared by every module."""


class FanningError(Exception):
    """Base class for all library errors."""


class SingularMatrix(FanningError):
    pass


class NotSymmetric(FanningError):
    pass


class AmbiguousSignature(FanningError):
    pass


class JetOrderUnsupported(FanningError):
    pass


class NotFanning(FanningError):
    def __init__(self, t, sigma_min=None, message=None):
        self.t = t
        self.sigma_min = sigma_min
        if message is None:
            message = f"curve is not fanning at t={t!r}"
            if sigma_min is not None:
                message += f" (min singular value of [A|A'] = {sigma_min:.3e})"
        super().__init__(message)


class NonInvertibleGauge(FanningError):
    pass


class NonMonotoneReparameterization(FanningError):
    pass


class IntegrationFailure(FanningError):
    pass


class WindowTooWide(FanningError):
    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"special parameterization leaves the affine chart near t={t!r}")


class NotLagrangian(FanningError):
    pass


class NotSymplecticInitialFrame(FanningError):
    pass


class SingularK(FanningError):
    pass


class NotWeaklyParallel(FanningError):
    pass


class NotTransversal(FanningError):
    pass


class SpecError(FanningError):
    """Malformed curve description."""


class IllConditioned(UserWarning):
    """Issued when a linear solve is legal but poorly conditioned."""


class InconsistentPaths(FanningError):
    """Two independent computations of the same quantity disagree."""
