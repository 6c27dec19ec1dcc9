"""
CM points of class number one and the exact coefficients of the
Chudnovsky-type series built on them.

For each N the integer j_N = 1728 J(tau_N) and the rational s2(tau_N)
are recognised from certified floating point values: a value is only
accepted when its error radius is below the distance to the next
rounding boundary.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Tuple

import mpmath
import pandas as pd
from mpmath import mpc, mpf
from pydantic import BaseModel, ConfigDict, ValidationError, field_serializer, model_validator

from errors import AmbiguousRounding, DomainError, IdentityFailure, NoSquareFound, NotASquare
from mpnum import PrecisionCtx, format_fixed, isqrt_exact, nearest_int, principal_sqrt, ref_pi, relative_residual
from qseries import approx_J, approx_s2, eisenstein_star, modular_J_certified, modular_s2_certified, qpoint
from weierstrass import division_points_ctau, measure_eta, wp

logger = logging.getLogger(__name__)

CM_DISCRIMINANTS = (3, 4, 7, 8, 11, 12, 16, 19, 27, 28, 43, 67, 163)
# J(tau_3) = 0 and J(tau_4) = 1 give no series
HEEGNER = tuple(n for n in CM_DISCRIMINANTS if n >= 7)
ALLOWED_C = (-2, -1, 1)

# coarse certificates on the approximant gaps
J_COARSE_FACTOR = 500
S2_COARSE_FACTOR = 222000
S2_COARSE_LIMIT = Fraction(1, 100)


@dataclass(frozen=True)
class CMPoint:
    """tau_N with its primitive relation A + B tau + C tau^2 = 0."""
    N: int
    A: int
    B: int
    C: int
    tau: mpc

    @property
    def D(self) -> int:
        return self.B * self.B - 4 * self.A * self.C

    @property
    def ac(self) -> int:
        return self.A * self.C


def _relation(N: int) -> Tuple[int, int, int]:
    if N % 4 == 0:
        return N // 4, 0, 1
    if N % 4 == 3:
        return (1 + N) // 4, -1, 1
    raise DomainError(f"N={N} is not 0 or 3 mod 4")


def cm_point(N: int, ctx: PrecisionCtx) -> CMPoint:
    """
    tau_N = i sqrt(N)/2 for N = 0 mod 4 and (1 + i sqrt(N))/2 for N = 3 mod 4.

    Raises:
        DomainError: N is not one of the thirteen class-number-one values
        IdentityFailure: the quadratic relation does not hold numerically
    """
    if N not in CM_DISCRIMINANTS:
        raise DomainError(f"N={N} is not a class number one discriminant, expected one of {CM_DISCRIMINANTS}")
    A, B, C = _relation(N)
    with ctx.scope():
        root = mpmath.sqrt(mpf(N))
        tau = mpc(0, root / 2) if N % 4 == 0 else mpc(mpf(1) / 2, root / 2)
        residual = abs(A + B * tau + C * tau ** 2)
        if residual > (A + 1) * mpmath.ldexp(mpf(1), -(ctx.bits // 2)):
            raise IdentityFailure(f"tau_{N} misses its relation by {mpmath.nstr(residual, 5)}")
    point = CMPoint(N=N, A=A, B=B, C=C, tau=tau)
    if point.D != -N:
        raise IdentityFailure(f"B^2 - 4AC = {point.D} for N={N}")
    return point


def cm_table(ctx: PrecisionCtx) -> List[CMPoint]:
    """The thirteen CM points, each checked against its quadratic relation."""
    return [cm_point(N, ctx) for N in CM_DISCRIMINANTS]


def _require_heegner(N: int) -> None:
    if N not in HEEGNER:
        raise DomainError(f"N={N} gives no series, expected one of {HEEGNER}")


def _round_certified(value: mpc, radius: mpf, what: str) -> int:
    """Nearest integer to a real value, provided the radius cannot move it."""
    if abs(value.imag) > radius:
        raise AmbiguousRounding(f"{what} has imaginary part {mpmath.nstr(value.imag, 5)} beyond radius")
    n = nearest_int(value.real)
    distance = mpf(1) / 2 - abs(value.real - n)
    if radius >= distance:
        raise AmbiguousRounding(
            f"{what}: radius {mpmath.nstr(radius, 5)} >= distance {mpmath.nstr(distance, 5)} to the rounding boundary")
    return n


def recognize_j_certified(N: int, ctx: PrecisionCtx) -> Tuple[int, mpf, mpf]:
    """
    j_N with the floating value 1728 J(tau_N) and its certified radius.

    Also asserts the coarse bound |1728 J - 1728 J~| < 500 |q|.

    Raises:
        AmbiguousRounding: the radius reaches the rounding boundary
        IdentityFailure: the coarse bound is violated
    """
    _require_heegner(N)
    point = cm_point(N, ctx)
    p = qpoint(point.tau, ctx)
    with ctx.scope():
        J, radius = modular_J_certified(p, ctx)
        value = 1728 * J
        radius = 1728 * radius
        j = _round_certified(value, radius, f"1728 J(tau_{N})")
        coarse = abs(value - 1728 * approx_J(p, ctx))
        limit = J_COARSE_FACTOR * p.abs_q_bound
        if coarse >= limit:
            raise IdentityFailure(f"|1728J - 1728J~| = {mpmath.nstr(coarse, 5)} >= 500|q| for N={N}")
        logger.debug("j_%d = %d, radius %s", N, j, mpmath.nstr(radius, 3))
        return j, value.real, radius


def recognize_j(N: int, ctx: PrecisionCtx) -> int:
    return recognize_j_certified(N, ctx)[0]


def choose_c(N: int, j: int, search_bound: int = 64) -> int:
    """
    Smallest |c| (sign tried both ways) with c N (1728 - j) a perfect square.

    Raises:
        NoSquareFound: nothing up to search_bound works
        IdentityFailure: a class-number-one N needs c outside {-2, -1, 1}
    """
    base = N * (1728 - j)
    if base == 0:
        raise NoSquareFound(f"N (1728 - j) vanishes for N={N}, j={j}")
    for magnitude in range(1, search_bound + 1):
        for c in (magnitude, -magnitude):
            if c * base > 0 and isqrt_exact(c * base) is not None:
                if N in HEEGNER and c not in ALLOWED_C:
                    raise IdentityFailure(f"c_{N} = {c} is not in {ALLOWED_C}")
                return c
    raise NoSquareFound(f"no |c| <= {search_bound} makes c * {base} a square")


def compute_b(N: int, j: int, c: int, ac: int) -> int:
    """b = sqrt(c N (1728 - j)) * ac^2, exactly."""
    root = isqrt_exact(c * N * (1728 - j))
    if root is None:
        raise NotASquare(f"{c} * {N} * (1728 - {j}) is not a perfect square")
    return root * ac * ac


class CoeffRow(BaseModel):
    """Exact coefficients for one N together with the certificate radii."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    N: int
    j: int
    c: int
    ac: int
    b: int
    a: int
    s2: Fraction
    frac: Fraction
    j_radius: float = 0.0
    a_radius: float = 0.0
    a_coarse_radius: float = 0.0

    @model_validator(mode='after')
    def _exact_invariants(self):
        if self.b * self.b != self.c * self.N * (1728 - self.j) * self.ac ** 4:
            raise ValueError(f"b^2 != c N (1728 - j) ac^4 for N={self.N}")
        if self.s2 != Fraction(self.a, self.b):
            raise ValueError(f"s2 != a/b for N={self.N}")
        if self.frac != (1 - self.s2) / 6:
            raise ValueError(f"frac != (1 - s2)/6 for N={self.N}")
        return self

    @field_serializer('s2', 'frac')
    def _rational_text(self, value: Fraction) -> str:
        return str(value)


def recognize_s2(N: int, ctx: PrecisionCtx) -> CoeffRow:
    """
    a_N = nearest integer to s2(tau_N) b_N, certified, and the full row.

    Raises:
        AmbiguousRounding: the a_N radius reaches the rounding boundary
        IdentityFailure: the coarse 222000|q|^3|b| bound fails or a row
            invariant does not hold
    """
    _require_heegner(N)
    point = cm_point(N, ctx)
    p = qpoint(point.tau, ctx)
    j, _, j_radius = recognize_j_certified(N, ctx)
    c = choose_c(N, j)
    b = compute_b(N, j, c, point.ac)
    with ctx.scope():
        s2, radius = modular_s2_certified(p, ctx)
        value = s2 * b
        a_radius = radius * abs(b)
        a = _round_certified(value, a_radius, f"s2(tau_{N}) * b")
        coarse_radius = S2_COARSE_FACTOR * p.abs_q_bound ** 3 * abs(b)
        coarse_gap = abs(approx_s2(p, ctx) * b - a)
        if coarse_radius >= mpf(S2_COARSE_LIMIT.numerator) / S2_COARSE_LIMIT.denominator or coarse_gap > coarse_radius:
            raise IdentityFailure(
                f"N={N}: |a~ - a| = {mpmath.nstr(coarse_gap, 5)}, 222000|q|^3|b| = {mpmath.nstr(coarse_radius, 5)}")
        if coarse_gap > coarse_radius / 2:
            logger.warning("N=%d: approximant gap %s is within 2x of its bound %s",
                           N, mpmath.nstr(coarse_gap, 3), mpmath.nstr(coarse_radius, 3))
    s2_exact = Fraction(a, b)
    try:
        row = CoeffRow(N=N, j=j, c=c, ac=point.ac, b=b, a=a, s2=s2_exact, frac=(1 - s2_exact) / 6,
                       j_radius=float(j_radius), a_radius=float(a_radius),
                       a_coarse_radius=float(coarse_radius))
    except ValidationError as e:
        raise IdentityFailure(str(e)) from e
    logger.debug("N=%d: c=%d b=%d a=%d s2=%s", N, c, b, a, s2_exact)
    return row


@lru_cache(maxsize=8)
def _coefficient_table(bits: int, guard_bits: int) -> Tuple[CoeffRow, ...]:
    ctx = PrecisionCtx(bits=bits, guard_bits=guard_bits)
    return tuple(recognize_s2(N, ctx) for N in HEEGNER)


def coefficient_table(ctx: PrecisionCtx) -> List[CoeffRow]:
    """CoeffRows for the eleven N >= 7, recognised once per precision."""
    return list(_coefficient_table(ctx.bits, ctx.guard_bits))


def approx_listing(ctx: PrecisionCtx) -> pd.DataFrame:
    """1728 J~ (5 decimals) and s2~ (20 decimals) at each tau_N."""
    rows = []
    for N in HEEGNER:
        p = qpoint(cm_point(N, ctx).tau, ctx)
        with ctx.scope():
            rows.append({
                'N': N,
                'J1728_approx': format_fixed(1728 * approx_J(p, ctx).real, 5),
                's2_approx': format_fixed(approx_s2(p, ctx).real, 20),
            })
    return pd.DataFrame(rows)


def appendixB_check(N: int, ctx: PrecisionCtx) -> mpf:
    """
    Trace identity and kappa consistency on L_tau (omega1 = 1, sqrt(D) = i sqrt(N)).

    Returns the max of the relative residuals of
        sqrt(D) E2* pi^2 / 3 = sum_{v in DIV(C tau)} wp(v) / (C tau),
        (A eta1 - C tau eta2) / tau = -sqrt(D) (pi^2 / 3) E2*,
        C tau kappa = -sum_{v in DIV(C tau)} wp(v).
    """
    _require_heegner(N)
    point = cm_point(N, ctx)
    p = qpoint(point.tau, ctx)
    with ctx.scope():
        tau = point.tau
        pi = ref_pi(ctx)
        sqrt_d = principal_sqrt(-N, ctx)
        e2_star = eisenstein_star(p, ctx)
        points = division_points_ctau(point.A, point.B, point.C, p, ctx)
        if len(points) != point.ac - 1:
            raise IdentityFailure(f"DIV(C tau) has {len(points)} points, expected {point.ac - 1}")
        total = sum((wp(v, p, ctx) for v in points.points), mpc(0))
        c_tau = point.C * tau
        trace = relative_residual(sqrt_d * e2_star * pi ** 2 / 3, total / c_tau)
        eta1, eta2 = measure_eta(p, ctx)
        kappa_def = (point.A * eta1 - c_tau * eta2) / tau
        kappa_e2 = -sqrt_d * pi ** 2 / 3 * e2_star
        kappa = relative_residual(kappa_def, kappa_e2)
        product = relative_residual(c_tau * kappa_def, -total)
        logger.debug("CM identities N=%d: trace %s kappa %s product %s", N,
                     mpmath.nstr(trace, 3), mpmath.nstr(kappa, 3), mpmath.nstr(product, 3))
        return max(trace, kappa, product)
