"""Exception types shared across the package."""


class KDSpinError(Exception):
    """Base class for all physics-level failures raised by kdspin."""


class InvalidArgument(KDSpinError, ValueError):
    pass


class SingularKinematics(KDSpinError):
    """An energy denominator vanished (on-shell intermediate state)."""


class PreconditionError(KDSpinError):
    pass


class UnsupportedComponent(KDSpinError, ValueError):
    pass


class PoorFit(KDSpinError):
    """Raised when a Rabi fit does not describe the data (R^2 below threshold)."""

    def __init__(self, message, r_squared=None):
        super().__init__(message)
        self.r_squared = r_squared


class NormDrift(KDSpinError):
    """Integrator lost unitarity beyond the allowed drift; the step is too coarse."""

    def __init__(self, message, drift=None, time=None):
        super().__init__(message)
        self.drift = drift
        self.time = time
