"""
Hypergeometric series: exact coefficient streams, certified evaluation of
2F1 and 3F2, Clausen's formula, the ODE coefficient recursions, Kummer's
solution for Delta^(1/12) and the Picard-Fuchs residual.
"""

import logging
import math
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, List, Sequence, Tuple

import mpmath
from mpmath import mpc, mpf
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from errors import BoundUnavailable, DomainError, IdentityFailure, OutOfDisc
from mpnum import Number, PrecisionCtx, ref_pi, relative_residual, root_c, to_mpc, to_mpf
from qseries import ARCHIMEDES_IM_TAU, QPoint, discriminant, modular_J

logger = logging.getLogger(__name__)

DISC_MARGIN_BITS = 20
MAX_TERMS = 10 ** 6


def _is_non_positive_integer(x: Fraction) -> bool:
    return x.denominator == 1 and x <= 0


def _check_lower(upper: Sequence[Fraction], lower: Sequence[Fraction]) -> None:
    """
    A non-positive integer lower parameter l is only allowed when some upper
    parameter u is a non-positive integer with u >= l, so the series
    terminates before the division by zero.
    """
    for l in lower:
        if not _is_non_positive_integer(l):
            continue
        if not any(_is_non_positive_integer(u) and u >= l for u in upper):
            raise ValueError(f"lower parameter {l} is a non-positive integer")


def _product(values: Iterable):
    result = 1
    for v in values:
        result *= v
    return result


class HG2F1(BaseModel):
    """Parameters of 2F1(a, b; c; z)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    a: Fraction
    b: Fraction
    c: Fraction

    @field_validator('a', 'b', 'c', mode='before')
    @classmethod
    def _to_fraction(cls, value):
        return Fraction(value)

    @model_validator(mode='after')
    def _valid_lower(self):
        _check_lower(self.upper, self.lower)
        return self

    @property
    def upper(self) -> Tuple[Fraction, ...]:
        return (self.a, self.b)

    @property
    def lower(self) -> Tuple[Fraction, ...]:
        return (self.c,)


class HG3F2(BaseModel):
    """Parameters of 3F2(alpha, beta, gamma; delta, eps; z)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    delta: Fraction
    eps: Fraction

    @field_validator('alpha', 'beta', 'gamma', 'delta', 'eps', mode='before')
    @classmethod
    def _to_fraction(cls, value):
        return Fraction(value)

    @model_validator(mode='after')
    def _valid_lower(self):
        _check_lower(self.upper, self.lower)
        return self

    @property
    def upper(self) -> Tuple[Fraction, ...]:
        return (self.alpha, self.beta, self.gamma)

    @property
    def lower(self) -> Tuple[Fraction, ...]:
        return (self.delta, self.eps)


# Kummer's solution uses 2F1(1/12, 5/12; 1; 1/J)
KUMMER = HG2F1(a=Fraction(1, 12), b=Fraction(5, 12), c=1)


def pochhammer(a: Number, n: int) -> Fraction:
    """Rising factorial (a)_n = a (a+1) ... (a+n-1), exact."""
    if n < 0:
        raise DomainError(f"pochhammer needs n >= 0, got {n}")
    a = Fraction(a)
    result = Fraction(1)
    for k in range(n):
        result *= a + k
    return result


def _coefficient(upper: Sequence[Fraction], lower: Sequence[Fraction], n: int) -> Fraction:
    numerator = _product(pochhammer(u, n) for u in upper)
    if numerator == 0:
        return Fraction(0)
    denominator = _product(pochhammer(l, n) for l in lower) * factorial(n)
    return numerator / denominator


@lru_cache(maxsize=128)
def _coefficient_table(upper: Tuple[Fraction, ...], lower: Tuple[Fraction, ...], count: int) -> Tuple[Fraction, ...]:
    """A_0 .. A_{count-1} from the term ratio, a vanishing numerator ends the series."""
    coeffs = [Fraction(1)]
    current = Fraction(1)
    for n in range(count - 1):
        if current != 0:
            numerator = _product(u + n for u in upper)
            if numerator == 0:
                current = Fraction(0)
            else:
                current = current * numerator / (_product(l + n for l in lower) * (n + 1))
        coeffs.append(current)
    return tuple(coeffs)


def coeff_2f1(p: HG2F1, n: int) -> Fraction:
    """n-th Maclaurin coefficient (a)_n (b)_n / ((c)_n n!)."""
    return _coefficient(p.upper, p.lower, n)


def coeff_3f2(p: HG3F2, n: int) -> Fraction:
    return _coefficient(p.upper, p.lower, n)


def series_coefficients(p, count: int) -> Tuple[Fraction, ...]:
    """First ``count`` coefficients of a 2F1 or 3F2 series."""
    return _coefficient_table(tuple(p.upper), tuple(p.lower), count)


def _hyp_eval(upper: Sequence[Fraction], lower: Sequence[Fraction], z: Number,
              ctx: PrecisionCtx, derivative: int = 0) -> Tuple[mpc, mpf]:
    """
    d-th derivative of pFq at z with a certified tail.

    The derivative series sum_{n>=d} A_n n!/(n-d)! z^(n-d) has term ratio
    z * prod(n+u) / (prod(n+l) * (n+1-d)), so (1-d) acts as an extra lower
    parameter. Beyond every parameter pole the factors max(1, (n+u)/(n+l))
    are non-increasing and bound all later ratios.
    """
    if derivative < 0:
        raise DomainError(f"derivative order must be >= 0, got {derivative}")
    with ctx.scope():
        z = to_mpc(z)
        abs_z = abs(z)
        if abs_z >= 1 - mpmath.ldexp(mpf(1), -DISC_MARGIN_BITS):
            raise OutOfDisc(f"|z| = {mpmath.nstr(abs_z, 8)} too close to or outside the unit circle")
        d = derivative
        lead = _coefficient(upper, lower, d) * factorial(d)
        if lead == 0:
            return mpc(0), mpf(0)
        lower_ext = list(lower) + [Fraction(1 - d)]
        safe = max([d] + [math.ceil(-x) for x in list(upper) + lower_ext]) + 1
        tol = mpmath.ldexp(mpf(1), -(ctx.bits + 16))
        term = mpc(to_mpf(lead))
        total = mpc(0)
        n = d
        for _ in range(MAX_TERMS):
            total += term
            numerator = _product(n + u for u in upper)
            if numerator == 0:
                return total, mpf(0)
            term = term * to_mpf(numerator / _product(n + l for l in lower_ext)) * z
            n += 1
            if n > safe:
                r = abs_z * _product(max(mpf(1), to_mpf((n + u) / (n + l))) for u, l in zip(upper, lower_ext))
                if r < 1 and abs(term) <= tol * abs(total) * (1 - r):
                    return total, abs(term) / (1 - r)
        raise BoundUnavailable(f"hypergeometric series did not settle within {MAX_TERMS} terms")


def eval_2f1(p: HG2F1, z: Number, ctx: PrecisionCtx, derivative: int = 0) -> mpc:
    """
    2F1(a, b; c; z) or its derivative for |z| < 1 - 2^-20.

    Raises:
        OutOfDisc: z too close to or outside the unit circle
    """
    return _hyp_eval(p.upper, p.lower, z, ctx, derivative)[0]


def eval_3f2(p: HG3F2, z: Number, ctx: PrecisionCtx, derivative: int = 0) -> mpc:
    return _hyp_eval(p.upper, p.lower, z, ctx, derivative)[0]


def ode_recursion_check_2f1(p: HG2F1, n_max: int) -> bool:
    """
    Coefficient of z^n in z(1-z)f'' + [c - (a+b+1)z]f' - ab f vanishes,
    i.e. (n+1)(n+c)A_{n+1} = (n^2 + (a+b)n + ab)A_n, for n <= n_max.
    """
    a, b, c = p.a, p.b, p.c
    coeffs = [coeff_2f1(p, n) for n in range(n_max + 2)]
    for n in range(n_max + 1):
        residual = ((n + 1) * n * coeffs[n + 1] - n * (n - 1) * coeffs[n]
                    + c * (n + 1) * coeffs[n + 1] - (a + b + 1) * n * coeffs[n]
                    - a * b * coeffs[n])
        if residual != 0:
            logger.debug("2F1 ODE fails at n=%d for %s", n, p)
            return False
    return True


def ode_recursion_check_3f2(p: HG3F2, n_max: int) -> bool:
    """
    Coefficient of z^n in
    z^2(1-z)f''' + [(d+e+1)z - (a+b+g+3)z^2]f'' + [de - (ab+ag+bg+a+b+g+1)z]f' - abg f
    vanishes for n <= n_max.
    """
    al, be, ga, de, ep = p.alpha, p.beta, p.gamma, p.delta, p.eps
    e1 = al + be + ga
    e2 = al * be + al * ga + be * ga
    e3 = al * be * ga
    coeffs = [coeff_3f2(p, n) for n in range(n_max + 2)]
    for n in range(n_max + 1):
        nxt, cur = coeffs[n + 1], coeffs[n]
        residual = ((n + 1) * n * (n - 1) * nxt - n * (n - 1) * (n - 2) * cur
                    + (de + ep + 1) * (n + 1) * n * nxt - (e1 + 3) * n * (n - 1) * cur
                    + de * ep * (n + 1) * nxt - (e2 + e1 + 1) * n * cur
                    - e3 * cur)
        if residual != 0:
            logger.debug("3F2 ODE fails at n=%d for %s", n, p)
            return False
    return True


def _cauchy_square(coeffs: Sequence[Fraction]) -> List[Fraction]:
    count = len(coeffs)
    return [sum((coeffs[i] * coeffs[n - i] for i in range(n + 1)), Fraction(0)) for n in range(count)]


def clausen_check(a: Number, b: Number, n_max: int) -> bool:
    """(2F1(a, b; a+b+1/2; z))^2 = 3F2(2a, 2b, a+b; 2a+2b, a+b+1/2; z) up to z^n_max."""
    a, b = Fraction(a), Fraction(b)
    half = Fraction(1, 2)
    left = HG2F1(a=a, b=b, c=a + b + half)
    right = HG3F2(alpha=2 * a, beta=2 * b, gamma=a + b, delta=2 * a + 2 * b, eps=a + b + half)
    squared = _cauchy_square(series_coefficients(left, n_max + 1))
    return squared == list(series_coefficients(right, n_max + 1))


def chud_coeff(n: int) -> Fraction:
    """
    (6n)! / ((3n)! (n!)^3 12^(3n)), cross-checked against
    (1/6)_n (5/6)_n (1/2)_n / (n!)^3.
    """
    if n < 0:
        raise DomainError(f"chud_coeff needs n >= 0, got {n}")
    by_factorial = Fraction(factorial(6 * n), factorial(3 * n) * factorial(n) ** 3 * 12 ** (3 * n))
    by_pochhammer = (pochhammer(Fraction(1, 6), n) * pochhammer(Fraction(5, 6), n)
                     * pochhammer(Fraction(1, 2), n) / factorial(n) ** 3)
    if by_factorial != by_pochhammer:
        raise IdentityFailure(f"factorial and Pochhammer forms differ at n={n}")
    return by_factorial


def clausen_chud_check(n_max: int) -> bool:
    """The square of 2F1(1/12, 5/12; 1; z) has coefficients chud_coeff(n)."""
    squared = _cauchy_square(series_coefficients(KUMMER, n_max + 1))
    return all(squared[n] == chud_coeff(n) for n in range(n_max + 1))


def kummer_check(p: QPoint, ctx: PrecisionCtx) -> mpf:
    """
    Relative residual of
    Delta^(1/12) = 2 pi / 12^(1/4) * (1/J)^(1/12) * 2F1(1/12, 5/12; 1; 1/J)
    with principal roots.
    """
    if p.im_tau <= mpf(ARCHIMEDES_IM_TAU):
        raise DomainError(f"kummer_check needs Im tau > 1.25, got {p.tau}")
    with ctx.scope():
        delta = discriminant(p, ctx)
        w = 1 / modular_J(p, ctx)
        lhs = root_c(delta, 12, ctx)
        rhs = (2 * ref_pi(ctx) / root_c(12, 4, ctx)
               * root_c(w, 12, ctx) * eval_2f1(KUMMER, w, ctx))
        return relative_residual(lhs, rhs)


def picard_fuchs_residual(J: Number, ctx: PrecisionCtx) -> mpf:
    """
    |b'' + b'/J + (31J - 4)/(144 J^2 (J-1)^2) b| for
    b(J) = J^(-1/4) (1-J)^(1/4) 2F1(1/12, 5/12; 1; 1/J).

    Derivatives are analytic: the series is differentiated term-wise and the
    algebraic prefactor through its logarithmic derivative.
    """
    with ctx.scope():
        J = to_mpc(J)
        w = 1 / J
        f0 = eval_2f1(KUMMER, w, ctx)
        f1 = eval_2f1(KUMMER, w, ctx, derivative=1)
        f2 = eval_2f1(KUMMER, w, ctx, derivative=2)
        # G(J) = F(1/J)
        g0 = f0
        g1 = -f1 / J ** 2
        g2 = f2 / J ** 4 + 2 * f1 / J ** 3
        u0 = root_c(1 - J, 4, ctx) / root_c(J, 4, ctx)
        log_d1 = -1 / (4 * J) + 1 / (4 * (J - 1))
        log_d2 = 1 / (4 * J ** 2) - 1 / (4 * (J - 1) ** 2)
        u1 = u0 * log_d1
        u2 = u0 * (log_d1 ** 2 + log_d2)
        b0 = u0 * g0
        b1 = u1 * g0 + u0 * g1
        b2 = u2 * g0 + 2 * u1 * g1 + u0 * g2
        residual = b2 + b1 / J + (31 * J - 4) / (144 * J ** 2 * (J - 1) ** 2) * b0
        return abs(residual)
