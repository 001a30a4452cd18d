class PoptError(Exception):
    """Base class for all errors raised by poptq."""


class NotHermitian(PoptError, ValueError):
    pass


class DimensionMismatch(PoptError, ValueError):
    pass


class NotPSD(PoptError, ValueError):
    pass


class SingularM(PoptError, ArithmeticError):
    """An eigenvalue fell below the inversion cutoff.

    Raised where the construction needs ``M^{-1/2}``; retry with a positive
    regularisation ``epsilon``.
    """


class BadTrace(PoptError, ValueError):
    pass


class FrameSingular(PoptError, ArithmeticError):
    pass


class NotPOPTWitnessed(PoptError):
    """A product vector with negative expectation was found.

    ``witness`` holds ``(alpha, beta, value)`` when available.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ResidualTooLarge(PoptError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class Unbounded(PoptError):
    pass


class InvalidPOVM(PoptError, ValueError):
    pass
