"""Exception hierarchy shared by every module of the package."""


class MultifracError(Exception):
    """Base class for all library errors."""


class SingularPoint(MultifracError, ValueError):
    """A weight or kernel was evaluated at a point where it diverges."""


class UnknownSpec(MultifracError, ValueError):
    pass


class DomainMismatch(MultifracError, ValueError):
    pass


class TooLarge(MultifracError, ValueError):
    pass


class BackendDomainMismatch(MultifracError, ValueError):
    """The spectral backend was requested on a non-periodic domain."""


class OrderOutOfRange(MultifracError, ValueError):
    pass


class NegativeWeight(MultifracError, ValueError):
    """The measure weight v(x) is not strictly positive on the grid."""


class OscillatoryProfileRejected(MultifracError, ValueError):
    pass


class QuadratureFailure(MultifracError, ArithmeticError):
    pass


class NotDiagonalizable(MultifracError, ValueError):
    pass


class ResonantMode(MultifracError, ArithmeticError):
    pass


class SingularJacobian(MultifracError, ArithmeticError):
    pass


class NonConvergence(MultifracError, ArithmeticError):
    pass


class ConfigError(MultifracError, ValueError):
    """Invalid or inconsistent run configuration."""
