"""
The eleven Chudnovsky-type series for pi and the engine that sums them.

Every series is used in the normalised form

    pi = sqrt(j / (j - 1728)) / (sqrt(N) * S),
    S  = sum_n (frac + n) * (6n)! / ((3n)! (n!)^3) / j^n,

summed either term by term in floating point or exactly by binary
splitting over integers (optionally across worker processes).
"""

import logging
import math
import multiprocessing
import sys
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import List, Sequence, Tuple

import mpmath
import pandas as pd
from mpmath import mpc, mpf
from pydantic import BaseModel, ConfigDict, field_serializer, field_validator, model_validator

from errors import AmbiguousRounding, DomainError, IdentityFailure
from mpnum import PrecisionCtx, exp_r, ln_r, principal_sqrt, rat_to_mpf, ref_pi, relative_residual
from qseries import ARCHIMEDES_IM_TAU, QPoint, modular_J, modular_s2

# Optional fast integer backend
try:
    import gmpy2
    GMPY2_AVAILABLE = True
except ImportError:
    GMPY2_AVAILABLE = False

# Large decimal conversions
if hasattr(sys, 'set_int_max_str_digits'):
    sys.set_int_max_str_digits(0)

logger = logging.getLogger(__name__)

GUARD_TERMS = 2
GUARD_BITS = 64
ESTIMATE_CTX = PrecisionCtx(bits=64, guard_bits=0)
TAIL_GUARD_DIGITS = 8
RATIO_ORACLE_TERMS = 50


class FormulaSpec(BaseModel):
    """
    One series of the catalog.

    The printed form is sqrt(printed_radical * |j|) / (printed_denominator * pi)
    = sum (6n)!/((3n)!(n!)^3) (p + q n) / j^n with frac = p/q.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    N: int
    j: int
    frac: Fraction
    label: str
    printed_denominator: int = 1
    printed_radical: int = 1

    @field_validator('frac', mode='before')
    @classmethod
    def _to_fraction(cls, value):
        return Fraction(value)

    @model_validator(mode='after')
    def _converges(self):
        if abs(self.j) <= 1728:
            raise ValueError(f"|j| must exceed 1728 for the series to converge, got {self.j}")
        return self

    @field_serializer('frac')
    def _rational_text(self, value: Fraction) -> str:
        return str(value)

    @property
    def p(self) -> int:
        return self.frac.numerator

    @property
    def q(self) -> int:
        return self.frac.denominator


_CATALOG = (
    FormulaSpec(N=7, j=-15 ** 3, frac=Fraction(8, 63), label='Chudnovsky 1988',
                printed_denominator=3),
    FormulaSpec(N=8, j=20 ** 3, frac=Fraction(3, 28), label='Borwein 1987',
                printed_denominator=8),
    FormulaSpec(N=11, j=-32 ** 3, frac=Fraction(15, 154), label='Chudnovsky 1988',
                printed_denominator=4),
    FormulaSpec(N=12, j=2 * 30 ** 3, frac=Fraction(1, 11), label='Ramanujan 1914',
                printed_denominator=72),
    FormulaSpec(N=16, j=66 ** 3, frac=Fraction(5, 63), label='Borwein 1987',
                printed_denominator=48, printed_radical=2),
    FormulaSpec(N=19, j=-96 ** 3, frac=Fraction(25, 342), label='Chudnovsky 1988',
                printed_denominator=12),
    FormulaSpec(N=27, j=-3 * 160 ** 3, frac=Fraction(31, 506), label='Borwein 1988',
                printed_denominator=36),
    FormulaSpec(N=28, j=255 ** 3, frac=Fraction(8, 133), label='Ramanujan 1914',
                printed_denominator=162),
    FormulaSpec(N=43, j=-960 ** 3, frac=Fraction(263, 5418), label='Chudnovsky 1988',
                printed_denominator=36),
    FormulaSpec(N=67, j=-5280 ** 3, frac=Fraction(10177, 261702), label='Chudnovsky 1988',
                printed_denominator=12),
    FormulaSpec(N=163, j=-640320 ** 3, frac=Fraction(13591409, 545140134), label='Chudnovsky 1988',
                printed_denominator=12),
)


def formula_catalog() -> List[FormulaSpec]:
    return list(_CATALOG)


def formula_for(N: int) -> FormulaSpec:
    for spec in _CATALOG:
        if spec.N == N:
            return spec
    raise DomainError(f"no formula for N={N}, expected one of {[s.N for s in _CATALOG]}")


def printed_form_check(spec: FormulaSpec) -> bool:
    """
    The printed prefactor sqrt(r |j|)/(k pi) equals the normalised one
    exactly, i.e. r N |j - 1728| = (k q)^2.
    """
    k, r = spec.printed_denominator, spec.printed_radical
    return r * spec.N * abs(spec.j - 1728) == (k * spec.q) ** 2


@lru_cache(maxsize=None)
def _central(n: int) -> int:
    """(6n)! / ((3n)! (n!)^3)"""
    return factorial(6 * n) // (factorial(3 * n) * factorial(n) ** 3)


def term(spec: FormulaSpec, n: int) -> Fraction:
    """Exact n-th term (frac + n) (6n)!/((3n)!(n!)^3) / j^n."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return (spec.frac + n) * Fraction(_central(n), spec.j ** n)


def _leaf_ratio(k: int) -> int:
    """C(k) / C(k - 1) * k^3 for k >= 1."""
    return 24 * (6 * k - 5) * (2 * k - 1) * (6 * k - 1)


@lru_cache(maxsize=None)
def validate_term_ratio(n_max: int = RATIO_ORACLE_TERMS) -> bool:
    """
    C(n+1)/C(n) = 24(6n+1)(2n+1)(6n+5)/(n+1)^3 against factorials, n < n_max.

    Raises:
        IdentityFailure: a ratio disagrees
    """
    for n in range(n_max):
        expected = Fraction(_central(n + 1), _central(n))
        if Fraction(_leaf_ratio(n + 1), (n + 1) ** 3) != expected:
            raise IdentityFailure(f"term ratio wrong at n={n}: expected {expected}")
    logger.debug("term ratio validated for n < %d", n_max)
    return True


def sum_exact(spec: FormulaSpec, n_terms: int) -> Fraction:
    """Exact partial sum of the first n_terms terms."""
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    return sum((term(spec, n) for n in range(n_terms)), Fraction(0))


def sum_naive(spec: FormulaSpec, n_terms: int, ctx: PrecisionCtx) -> mpf:
    """Floating accumulation of the exact terms."""
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    with ctx.scope():
        total = mpf(0)
        for n in range(n_terms):
            total += rat_to_mpf(term(spec, n), ctx)
        return total


@dataclass(frozen=True)
class BSTriple:
    """P, Q, T of the half-open term range [lo, hi)."""
    P: int
    Q: int
    T: int
    lo: int = 0
    hi: int = 0

    def value(self, q: int) -> Fraction:
        """The partial sum over [0, hi) when lo == 0."""
        return Fraction(int(self.T), int(self.Q) * q)


def combine(left: BSTriple, right: BSTriple) -> BSTriple:
    """Merge adjacent ranges [a, m) and [m, b)."""
    return BSTriple(P=left.P * right.P, Q=left.Q * right.Q,
                    T=right.Q * left.T + left.P * right.T,
                    lo=left.lo, hi=right.hi)


def combine_pairs(triples: Sequence[BSTriple]) -> BSTriple:
    """Pairwise reduction of adjacent triples, keeping operand sizes balanced."""
    triples = list(triples)
    while len(triples) > 1:
        merged = [combine(triples[i], triples[i + 1]) for i in range(0, len(triples) - 1, 2)]
        if len(triples) % 2:
            merged.append(triples[-1])
        triples = merged
    return triples[0]


def _bs(lo: int, hi: int, p: int, q: int, j: int) -> BSTriple:
    if hi - lo == 1:
        k = lo
        if k == 0:
            one = gmpy2.mpz(1) if GMPY2_AVAILABLE else 1
            return BSTriple(P=one, Q=one, T=one * p, lo=lo, hi=hi)
        P = _leaf_ratio(k)
        Q = k * k * k * j
        if GMPY2_AVAILABLE:
            P, Q = gmpy2.mpz(P), gmpy2.mpz(Q)
        return BSTriple(P=P, Q=Q, T=(p + q * k) * P, lo=lo, hi=hi)
    mid = (lo + hi) // 2
    return combine(_bs(lo, mid, p, q, j), _bs(mid, hi, p, q, j))


def split_range(spec: FormulaSpec, lo: int, hi: int) -> BSTriple:
    """(P, Q, T) of the term range [lo, hi)."""
    if not 0 <= lo < hi:
        raise ValueError(f"need 0 <= lo < hi, got [{lo}, {hi})")
    return _bs(lo, hi, spec.p, spec.q, spec.j)


def _bs_chunk(args: Tuple[int, int, int, int, int]) -> Tuple[int, int, int, int, int]:
    lo, hi, p, q, j = args
    t = _bs(lo, hi, p, q, j)
    return int(t.P), int(t.Q), int(t.T), lo, hi


def sum_binary_split(spec: FormulaSpec, n_terms: int, workers: int = 1) -> BSTriple:
    """
    Exact (P, Q, T) over [0, n_terms) with S_truncated = T / (Q q).

    With workers > 1 the range is cut into chunks summed in a process pool
    and merged pairwise.
    """
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    validate_term_ratio()
    p, q, j = spec.p, spec.q, spec.j
    if workers <= 1 or n_terms < 4 * workers:
        return _bs(0, n_terms, p, q, j)
    bounds = [n_terms * i // (2 * workers) for i in range(2 * workers + 1)]
    jobs = [(lo, hi, p, q, j) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    logger.debug("binary splitting %d terms in %d chunks on %d workers", n_terms, len(jobs), workers)
    with multiprocessing.Pool(processes=workers) as pool:
        parts = pool.map(_bs_chunk, jobs)
    triples = [BSTriple(P=P, Q=Q, T=T, lo=lo, hi=hi) for P, Q, T, lo, hi in parts]
    if GMPY2_AVAILABLE:
        triples = [BSTriple(P=gmpy2.mpz(t.P), Q=gmpy2.mpz(t.Q), T=gmpy2.mpz(t.T), lo=t.lo, hi=t.hi)
                   for t in triples]
    return combine_pairs(triples)


def digits_per_term(spec: FormulaSpec) -> mpf:
    """log10 |j / 1728|."""
    with mpmath.workprec(64):
        return mpmath.log10(abs(mpf(spec.j) / 1728))


def terms_for(spec: FormulaSpec, digits: int) -> int:
    return math.ceil(digits / float(digits_per_term(spec))) + GUARD_TERMS


def _pi_from_series(spec: FormulaSpec, series: mpf, ctx: PrecisionCtx) -> mpf:
    with ctx.scope():
        prefactor = principal_sqrt(mpf(spec.j) / (spec.j - 1728), ctx)
        if prefactor.imag != 0:
            raise DomainError(f"j/(j - 1728) is not positive for N={spec.N}")
        return prefactor.real / (mpmath.sqrt(spec.N) * series)


def _series_from_triple(triple: BSTriple, spec: FormulaSpec, ctx: PrecisionCtx) -> mpf:
    with ctx.scope():
        return mpf(int(triple.T)) / (mpf(int(triple.Q)) * spec.q)


def pi_from_terms(spec: FormulaSpec, n_terms: int, ctx: PrecisionCtx, method: str = 'bs',
                  workers: int = 1) -> mpf:
    """pi from the first n_terms terms at the precision of ctx."""
    if method == 'bs':
        series = _series_from_triple(sum_binary_split(spec, n_terms, workers), spec, ctx)
    elif method == 'naive':
        series = sum_naive(spec, n_terms, ctx)
    else:
        raise ValueError(f"unknown method {method!r}, expected 'bs' or 'naive'")
    return _pi_from_series(spec, series, ctx)


def tail_bound(spec: FormulaSpec, n_terms: int) -> mpf:
    """
    Upper bound for |sum_{n >= n_terms} term(n)|.

    Successive terms shrink at least by (frac + n + 1)/(frac + n) * 1728/|j|
    because C(n+1)/C(n) < 1728, so the tail is below a geometric series.
    """
    with ESTIMATE_CTX.scope():
        n = n_terms
        frac = rat_to_mpf(spec.frac, ESTIMATE_CTX)
        rho = (frac + n + 1) / (frac + n) * 1728 / abs(spec.j)
        if rho >= 1:
            return mpmath.inf
        log_c = mpmath.loggamma(6 * n + 1) - mpmath.loggamma(3 * n + 1) - 3 * mpmath.loggamma(n + 1)
        first = (frac + n) * exp_r(log_c - n * ln_r(abs(spec.j), ESTIMATE_CTX), ESTIMATE_CTX)
        return first / (1 - rho) * (1 + mpmath.ldexp(mpf(1), -40))


def _series_estimate(spec: FormulaSpec) -> mpf:
    with mpmath.workprec(64):
        return mpmath.sqrt(mpf(spec.j) / (spec.j - 1728)) / (mpmath.sqrt(spec.N) * mpmath.pi)


def planned_terms(spec: FormulaSpec, digits: int) -> int:
    """
    Number of terms compute_pi sums: terms_for, extended until the tail
    bound sits TAIL_GUARD_DIGITS below the last requested digit.
    """
    if digits < 1:
        raise ValueError(f"digits must be >= 1, got {digits}")
    n_terms = terms_for(spec, digits)
    with mpmath.workprec(64):
        target = _series_estimate(spec) * mpf(10) ** -(digits + TAIL_GUARD_DIGITS)
    while tail_bound(spec, n_terms) > target:
        n_terms += 1
    return n_terms


def compute_pi(spec: FormulaSpec, digits: int, method: str = 'bs', workers: int = 1) -> str:
    """
    "3." followed by exactly `digits` correct decimals.

    Sums planned_terms(spec, digits) terms; only the slowly converging
    small-|j| series need more than terms_for.

    Raises:
        AmbiguousRounding: the truncation point is not separated from the
            working and truncation error
    """
    if digits < 1:
        raise ValueError(f"digits must be >= 1, got {digits}")
    ctx = PrecisionCtx.for_digits(digits, guard_bits=GUARD_BITS)
    n_terms = planned_terms(spec, digits)
    with mpmath.workprec(64):
        tail_rel = tail_bound(spec, n_terms) / _series_estimate(spec)
    logger.debug("N=%d: %d digits from %d terms at %d bits", spec.N, digits, n_terms, ctx.working_bits)
    value = pi_from_terms(spec, n_terms, ctx, method=method, workers=workers)
    with ctx.scope():
        scaled = value * mpf(10) ** digits
        slack = scaled * (mpmath.ldexp(mpf(1), -(ctx.bits + GUARD_BITS // 2)) + 2 * tail_rel)
        low = int(mpmath.floor(scaled - slack))
        if low != int(mpmath.floor(scaled + slack)):
            raise AmbiguousRounding(f"pi * 10^{digits} is too close to an integer to truncate")
    text = str(low)
    return f"{text[0]}.{text[1:]}"


def convergence_profile(spec: FormulaSpec, n_max: int, ctx: PrecisionCtx) -> pd.DataFrame:
    """Correct decimal digits of pi after n = 1..n_max terms against ref_pi."""
    rows = []
    reference = ref_pi(ctx)
    dpt = float(digits_per_term(spec))
    with ctx.scope():
        cap = int(ctx.bits * math.log10(2))
        for n in range(1, n_max + 1):
            error = abs(pi_from_terms(spec, n, ctx) - reference)
            correct = cap if error == 0 else min(cap, int(mpmath.floor(-mpmath.log10(error))))
            rows.append({'n_terms': n, 'correct_digits': correct, 'expected': n * dpt})
    return pd.DataFrame(rows)


def main_theorem_check(p: QPoint, ctx: PrecisionCtx) -> mpf:
    """
    Relative residual of
        sqrt(J / (J - 1)) / (2 pi Im tau) = sum (frac + n) chud_coeff(n) J^-n,
    frac = (1 - s2) / 6, summed until the geometric tail bound is below eps.

    Raises:
        DomainError: Im tau <= 1.25
    """
    with ctx.scope():
        if p.im_tau <= mpf(ARCHIMEDES_IM_TAU):
            raise DomainError(f"main theorem needs Im tau > {ARCHIMEDES_IM_TAU}, got {p.im_tau}")
        J = modular_J(p, ctx)
        s2 = modular_s2(p, ctx)
        lhs = principal_sqrt(J / (J - 1), ctx) / (2 * ref_pi(ctx) * p.im_tau)
        frac = (1 - s2) / 6
        inv_j = 1 / J
        abs_inv_j = abs(inv_j)
        abs_frac = abs(frac)
        coeff = mpc(1)
        total = mpc(0)
        n = 0
        while True:
            current = (frac + n) * coeff
            total += current
            if n > abs_frac + 1:
                rho = (n + 1 + abs_frac) / (n - abs_frac) * abs_inv_j
                if rho < 1 and abs(current) * rho / (1 - rho) <= ctx.eps * abs(total):
                    break
            coeff *= mpf((6 * n + 1) * (2 * n + 1) * (6 * n + 5)) / (72 * (n + 1) ** 3) * inv_j
            n += 1
        logger.debug("main theorem at tau=%s: %d terms", mpmath.nstr(p.tau, 8), n + 1)
        return relative_residual(lhs, total)
