"""
Exception hierarchy shared by every module.

Each error also derives from the closest builtin so callers can catch
either the specific kind or the generic Python category.
"""


class ChudPiError(Exception):
    """Base class for all pipeline errors."""


class DomainError(ChudPiError, ValueError):
    """Argument outside the domain of a function (ln of a non-positive number, Im tau <= 0, ...)."""


class BoundUnavailable(ChudPiError, ArithmeticError):
    """The analytic tail bound does not apply: (1+1/l)^k |q| >= 1."""


class SingularDenominator(ChudPiError, ZeroDivisionError):
    """Denominator indistinguishable from zero within its certified radius."""


class OutOfDisc(ChudPiError, ValueError):
    """Hypergeometric argument outside |z| < 1 - 2^-20."""


class ReductionFailure(ChudPiError, ArithmeticError):
    """z could not be reduced into the convergence band of the Fourier formulas."""


class PoleProximity(ChudPiError, ZeroDivisionError):
    """z lies within 2^(-bits/2) of a lattice point."""


class ZeroDerivative(ChudPiError, ZeroDivisionError):
    """wp'(z) vanishes to working precision."""


class InvalidCM(ChudPiError, ValueError):
    """(A, B, C) is not a primitive quadratic relation for tau."""


class AmbiguousRounding(ChudPiError, ArithmeticError):
    """Certified radius too large to decide the nearest integer."""


class NoSquareFound(ChudPiError, LookupError):
    """No c within the search bound makes c*N*(1728-j) a square."""


class NotASquare(ChudPiError, ValueError):
    """Integer expected to be a perfect square is not."""


class IdentityFailure(ChudPiError, AssertionError):
    """An identity asserted internally does not hold."""
