"""Exception hierarchy.

Two families: ``InputError`` for bad arguments or malformed files (CLI exit
code 2) and ``NumericalError`` for computations that cannot produce an answer
(CLI exit code 1).
"""


class PointerLabError(Exception):
    """Base class for all package errors."""


class InputError(PointerLabError, ValueError):
    pass


class NumericalError(PointerLabError, ArithmeticError):
    pass


# --- input errors -----------------------------------------------------------

class DimensionMismatch(InputError):
    pass


class NotSymmetric(InputError):
    pass


class InvalidCovariance(InputError):
    """Covariance violates the uncertainty relation or is not positive."""


class ImpureInitial(InputError):
    """Mixing/survival times need a pure initial state, det(2 Omega) = 1."""


class NonpositiveGamma(InputError):
    pass


class NoRealRoot(InputError):
    """No positive boundary gamma exists for the requested beta."""


class ParseError(InputError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


# --- numerical errors -------------------------------------------------------

class SingularSystem(NumericalError):
    pass


class NoStabilizingSolution(NumericalError):
    pass


class NotPSD(NumericalError):
    pass


class SingularOmega(NumericalError):
    pass


class SingularSum(NumericalError):
    pass


class NoRoot(NumericalError):
    def __init__(self, message, t_max=None):
        self.t_max = t_max
        if t_max is not None:
            message = f"{message} (searched up to t_max={t_max:.6g})"
        super().__init__(message)


class NonDecohering(NumericalError):
    pass


class EmptyFeasibleSet(NumericalError):
    pass


class NotHurwitz(NumericalError):
    pass


class NegativeDiscriminant(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass


class Divergence(NumericalError):
    pass


class InsufficientSamples(NumericalError):
    pass
