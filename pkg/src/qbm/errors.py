"""Exception hierarchy shared by every module of the package."""


class QbmError(Exception):
    """Base class for all errors raised by :mod:`qbm`."""


class InvariantError(QbmError, ValueError):
    """A value object was built with parameters that violate its invariants."""


class DomainError(QbmError, ValueError):
    """Argument lies outside the domain where the function is defined."""


class PoleError(DomainError):
    """Argument lies within ``pole_tolerance`` of a pole."""


class PoleCoincidenceError(QbmError, ArithmeticError):
    """A Matsubara pole collides with a cyclotron pole.

    The simple-pole residue formulas are invalid there.
    """


class DenominatorZero(QbmError, ArithmeticError):
    """The response denominator vanished at a real frequency."""


class ConvergenceError(QbmError, ArithmeticError):
    """Numerical integration did not reach the requested tolerance.

    Attributes
    ----------
    achieved : float
        Best error estimate obtained before giving up.
    """

    def __init__(self, message, achieved=float("nan")):
        super().__init__(message)
        self.achieved = achieved


class ConfigError(QbmError, ValueError):
    """Invalid simulation or command configuration."""


class InsufficientData(QbmError, ValueError):
    """Series is too short to classify."""


class NonMonotoneFlip(QbmError):
    """Classification alternates along an omega_c grid."""
