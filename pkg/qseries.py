"""
Divisor sums, Eisenstein q-series with certified tails, and the modular
functions J, s2, eta^24 and Delta built on them.

All series are evaluated at a QPoint, i.e. tau together with
q = exp(2 pi i tau) and a certified upper bound for |q|.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
import pandas as pd
from mpmath import mpc, mpf

from errors import BoundUnavailable, DomainError, SingularDenominator
from mpnum import Number, PrecisionCtx, exp_c, exp_r, ref_pi, to_mpc

logger = logging.getLogger(__name__)

# E_k = 1 + c_k * sum sigma_{k-1}(n) q^n
EISENSTEIN_COEFFS = {2: -24, 4: 240, 6: -504}

# |R_k^(3)| <= const * |q|^3 for Im tau > 1.25
REMAINDER3_CONSTANTS = {2: '4.007', 4: '28.1', 6: '245.6'}

ARCHIMEDES_IM_TAU = '1.25'
ARCHIMEDES_EXPONENT = '7.852'

MAX_TRUNCATION_ORDER = 100000


@dataclass(frozen=True)
class QPoint:
    """A point of the upper half plane with its nome q = e^{2 pi i tau}."""
    tau: mpc
    q: mpc
    abs_q_bound: mpf

    @property
    def im_tau(self) -> mpf:
        return self.tau.imag

    @property
    def q_is_real(self) -> bool:
        return self.q.imag == 0


@dataclass(frozen=True)
class EisValue:
    """Truncated Eisenstein series with its certified tail."""
    weight: int
    value: mpc
    truncation_order: int
    tail_bound: mpf


@dataclass
class BoundReport:
    """Margins of every inequality per sample, plus the overall verdict."""
    frame: pd.DataFrame
    passed: bool


def qpoint(tau: Number, ctx: PrecisionCtx) -> QPoint:
    """
    Build a QPoint for tau.

    When 2*Re(tau) is an integer, q is the real number +-exp(-2 pi Im tau)
    with an exactly zero imaginary part.
    """
    with ctx.scope():
        t = to_mpc(tau)
        x, y = t.real, t.imag
        if y <= 0:
            raise DomainError(f"tau must lie in the upper half plane, got {t}")
        pi = ref_pi(ctx)
        radius = exp_r(-2 * pi * y, ctx)
        two_x = 2 * x
        if two_x == mpmath.floor(two_x):
            sign = -1 if int(two_x) % 2 else 1
            q = mpc(sign * radius, 0)
        else:
            angle = 2 * pi * (x - mpmath.floor(x))
            q = radius * exp_c(mpc(0, angle), ctx)
        bound = radius * (1 + mpmath.ldexp(mpf(1), 8 - ctx.working_bits))
        return QPoint(tau=t, q=q, abs_q_bound=bound)


def divisor_sigma(k: int, n: int) -> int:
    """sigma_k(n) = sum of d^k over the divisors d of n."""
    if n < 1:
        raise DomainError(f"divisor_sigma needs n >= 1, got {n}")
    if k < 0:
        raise DomainError(f"divisor_sigma needs k >= 0, got {k}")
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d ** k
            other = n // d
            if other != d:
                total += other ** k
        d += 1
    return total


@lru_cache(maxsize=64)
def divisor_sigma_table(k: int, count: int) -> Tuple[int, ...]:
    """sigma_k(n) for 0 <= n < count by a divisor sieve (entry 0 is 0)."""
    table = [0] * count
    for d in range(1, count):
        power = d ** k
        for multiple in range(d, count, d):
            table[multiple] += power
    return tuple(table)


def _sigma_table(k: int, l: int) -> Tuple[int, ...]:
    # round up so nearby truncation orders share one sieve
    count = 1 << max(5, (l + 1).bit_length())
    return divisor_sigma_table(k, count)


def _tail_bound(k: int, abs_q: mpf, l: int) -> Optional[mpf]:
    """Bound for |sum_{n>=l} sigma_{k-1}(n) q^n| or None when it does not apply."""
    ratio = (1 + mpf(1) / l) ** k * abs_q
    if ratio >= 1:
        return None
    return mpf(l) ** k * abs_q ** l / (1 - ratio)


def _sigma_series(k: int, q: mpc, start: int, stop: int) -> mpc:
    sigma = _sigma_table(k - 1, stop)
    total = mpc(0)
    power = q ** start
    for n in range(start, stop):
        total += sigma[n] * power
        power *= q
    return total


def eisenstein(k: int, p: QPoint, l: int, ctx: PrecisionCtx) -> EisValue:
    """
    E_k(tau) truncated before q^l.

    Args:
        k: weight, one of 2, 4, 6
        p: evaluation point
        l: truncation order (terms n < l are summed)
        ctx: precision

    Returns:
        EisValue whose tail_bound bounds |E_k - value|
    """
    if k not in EISENSTEIN_COEFFS:
        raise DomainError(f"weight must be 2, 4 or 6, got {k}")
    if l < 1:
        raise DomainError(f"truncation order must be >= 1, got {l}")
    with ctx.scope():
        tail = _tail_bound(k, p.abs_q_bound, l)
        if tail is None:
            raise BoundUnavailable(f"(1+1/{l})^{k}*|q| >= 1, no tail bound for E_{k}")
        coeff = EISENSTEIN_COEFFS[k]
        value = 1 + coeff * _sigma_series(k, p.q, 1, l)
        return EisValue(weight=k, value=value, truncation_order=l, tail_bound=abs(coeff) * tail)


def truncation_order(k: int, p: QPoint, tol: mpf) -> int:
    """Smallest l whose certified tail for E_k is below tol."""
    coeff = abs(EISENSTEIN_COEFFS[k])
    l = 2
    while l <= MAX_TRUNCATION_ORDER:
        tail = _tail_bound(k, p.abs_q_bound, l)
        if tail is not None and coeff * tail < tol:
            return l
        l += 1
    raise BoundUnavailable(f"no truncation order below {MAX_TRUNCATION_ORDER} reaches {tol}")


def eisenstein_auto(k: int, p: QPoint, ctx: PrecisionCtx) -> EisValue:
    """E_k with tail below 2^-(bits+16) relative to the partial sum."""
    with ctx.scope():
        tol = mpmath.ldexp(mpf(1), -(ctx.bits + 16))
        result = eisenstein(k, p, truncation_order(k, p, tol), ctx)
        size = abs(result.value)
        if 0 < size < 1 and result.tail_bound >= tol * size:
            result = eisenstein(k, p, truncation_order(k, p, tol * size), ctx)
        logger.debug("E_%d at l=%d, tail %s", k, result.truncation_order, mpmath.nstr(result.tail_bound, 3))
        return result


def _cancellation_bits(p: QPoint) -> int:
    # E4^3 - E6^2 = 1728 q + ..., so about -log2|q| bits cancel
    with mpmath.workprec(53):
        return max(0, int(mpmath.ceil(-mpmath.log(p.abs_q_bound, 2)))) + 8


def modular_J_certified(p: QPoint, ctx: PrecisionCtx) -> Tuple[mpc, mpf]:
    """
    Klein's J = E4^3 / (E4^3 - E6^2) with a certified error radius.

    Raises:
        SingularDenominator: the denominator is not separated from zero
    """
    work = ctx.extended(_cancellation_bits(p))
    with work.scope():
        e4 = eisenstein_auto(4, p, work)
        e6 = eisenstein_auto(6, p, work)
        num = e4.value ** 3
        den = num - e6.value ** 2
        a4, a6 = abs(e4.value), abs(e6.value)
        d_num = (a4 + e4.tail_bound) ** 3 - a4 ** 3
        d_den = d_num + (a6 + e6.tail_bound) ** 2 - a6 ** 2
        if abs(den) <= d_den:
            raise SingularDenominator(f"E4^3 - E6^2 not separated from 0 at tau={p.tau}")
        j = num / den
        radius = (abs(num) * d_den + abs(den) * d_num) / (abs(den) * (abs(den) - d_den))
        radius += 4 * abs(j) * ctx.eps
    with ctx.scope():
        return +j, +radius


def modular_J(p: QPoint, ctx: PrecisionCtx) -> mpc:
    return modular_J_certified(p, ctx)[0]


def eisenstein_star(p: QPoint, ctx: PrecisionCtx) -> mpc:
    """E2* = E2 - 3/(pi Im tau), pi taken from ref_pi."""
    with ctx.scope():
        e2 = eisenstein_auto(2, p, ctx)
        return e2.value - 3 / (ref_pi(ctx) * p.im_tau)


def modular_s2_certified(p: QPoint, ctx: PrecisionCtx) -> Tuple[mpc, mpf]:
    """s2 = E4 * E2* / E6 with a certified error radius."""
    work = ctx.extended(16)
    with work.scope():
        e2 = eisenstein_auto(2, p, work)
        e4 = eisenstein_auto(4, p, work)
        e6 = eisenstein_auto(6, p, work)
        e2_star = e2.value - 3 / (ref_pi(work) * p.im_tau)
        a6 = abs(e6.value)
        if a6 <= e6.tail_bound:
            raise SingularDenominator(f"|E6| below its tail bound at tau={p.tau}")
        num = e4.value * e2_star
        r_num = abs(e4.value) * e2.tail_bound + abs(e2_star) * e4.tail_bound + e2.tail_bound * e4.tail_bound
        s2 = num / e6.value
        radius = (abs(num) * e6.tail_bound + a6 * r_num) / (a6 * (a6 - e6.tail_bound))
        radius += 4 * (abs(s2) + abs(e4.value * e2.value) / a6) * ctx.eps
    with ctx.scope():
        return +s2, +radius


def modular_s2(p: QPoint, ctx: PrecisionCtx) -> mpc:
    return modular_s2_certified(p, ctx)[0]


def approx_J(p: QPoint, ctx: PrecisionCtx) -> mpc:
    """J~ = (1 + 240(q + 9q^2))^3 / (1728 q (1 - q - q^2)^24)."""
    with ctx.scope():
        q = p.q
        return (1 + 240 * (q + 9 * q ** 2)) ** 3 / (1728 * q * (1 - q - q ** 2) ** 24)


def approx_s2(p: QPoint, ctx: PrecisionCtx) -> mpc:
    """s2~ = X/Y * Z from the first two Fourier coefficients of E2, E4, E6."""
    with ctx.scope():
        q = p.q
        x = 1 + 240 * (q + 9 * q ** 2)
        y = 1 - 504 * (q + 33 * q ** 2)
        z = 1 - 24 * (q + 3 * q ** 2) - 3 / (ref_pi(ctx) * p.im_tau)
        return x / y * z


def eta24(p: QPoint, ctx: PrecisionCtx) -> mpc:
    """eta^24 = (E4^3 - E6^2) / 1728."""
    work = ctx.extended(_cancellation_bits(p))
    with work.scope():
        e4 = eisenstein_auto(4, p, work)
        e6 = eisenstein_auto(6, p, work)
        value = (e4.value ** 3 - e6.value ** 2) / 1728
    with ctx.scope():
        return +value


def discriminant(p: QPoint, ctx: PrecisionCtx) -> mpc:
    """Delta(L_tau) = (2 pi)^12 eta^24 for the lattice Z + Z tau."""
    with ctx.scope():
        return (2 * ref_pi(ctx)) ** 12 * eta24(p, ctx)


def remainder3(k: int, p: QPoint, ctx: PrecisionCtx) -> mpc:
    """R_k^(3) = sum_{n>=3} sigma_{k-1}(n) q^n."""
    if k not in EISENSTEIN_COEFFS:
        raise DomainError(f"weight must be 2, 4 or 6, got {k}")
    with ctx.scope():
        tol = mpmath.ldexp(mpf(1), -(ctx.bits + 16)) * p.abs_q_bound ** 3 * abs(EISENSTEIN_COEFFS[k])
        l = max(4, truncation_order(k, p, tol))
        return _sigma_series(k, p.q, 3, l)


def sample_points(n: int, rng: np.random.Generator, y_low: float = 1.26, y_high: float = 3.0,
                  x_half_width: float = 0.5) -> List[complex]:
    """Random tau with Re in [-x_half_width, x_half_width) and Im in [y_low, y_high)."""
    xs = rng.uniform(-x_half_width, x_half_width, size=n)
    ys = rng.uniform(y_low, y_high, size=n)
    return [complex(float(x), float(y)) for x, y in zip(xs, ys)]


def divisor_bound_check(n_max: int = 10 ** 4) -> bool:
    """sigma_k(n) <= n^(k+1) for k in 1, 3, 5 and all n <= n_max."""
    for k in (1, 3, 5):
        table = divisor_sigma_table(k, n_max + 1)
        for n in range(1, n_max + 1):
            if table[n] > n ** (k + 1):
                logger.warning("sigma_%d(%d) = %d exceeds n^%d", k, n, table[n], k + 1)
                return False
    return True


def archimedes_check(ctx: PrecisionCtx) -> Dict[str, bool]:
    """3 + 10/71 < pi < 22/7 and the resulting gate |q| < e^-7.852 for Im tau >= 1.25."""
    with ctx.scope():
        pi = ref_pi(ctx)
        lower = mpf(223) / 71
        gate = 2 * lower * mpf(ARCHIMEDES_IM_TAU) > mpf(ARCHIMEDES_EXPONENT)
        return {
            'pi_lower': bool(lower < pi),
            'pi_upper': bool(pi < mpf(22) / 7),
            'gate': bool(gate),
        }


def _bound_row(index: int, tau: mpc, check: str, value: mpf, bound: mpf, upper: bool, slack: mpf) -> Dict:
    margin = bound - value if upper else value - bound
    return {
        'sample': index,
        'tau': mpmath.nstr(tau, 8),
        'check': check,
        'value': float(value),
        'bound': float(bound),
        'margin': float(margin),
        'passed': bool(margin > slack),
    }


def bound_suite(samples: Sequence[QPoint], ctx: PrecisionCtx) -> BoundReport:
    """
    Evaluate the explicit inequalities valid for Im tau > 1.25.

    Truth values are computed 32 bits above ``ctx`` and a verdict only
    passes with a margin above 2^-bits times the compared magnitudes.

    Returns:
        BoundReport with one frame row per (sample, inequality)
    """
    rows = []
    truth = ctx.extended(32)
    with truth.scope():
        gate = exp_r(-mpf(ARCHIMEDES_EXPONENT), truth)
        for index, p in enumerate(samples):
            if p.im_tau <= mpf(ARCHIMEDES_IM_TAU):
                raise DomainError(f"bound_suite needs Im tau > 1.25, got {p.tau}")
            q_abs = abs(p.q)
            j = modular_J(p, truth)
            s2 = modular_s2(p, truth)
            e6 = eisenstein_auto(6, p, truth)
            checks = [
                ('abs_J_lower', abs(j), mpf('1.096'), False),
                ('Jq_lower', abs(1728 * j * p.q), mpf('0.737'), False),
                ('Jq_upper', abs(1728 * j * p.q), mpf('1.321'), True),
                ('J_approx', abs(1728 * j - 1728 * approx_J(p, truth)), 500 * q_abs, True),
                ('s2_approx', abs(s2 - approx_s2(p, truth)), 222000 * q_abs ** 3, True),
                ('E6_lower', abs(e6.value), mpf('0.8'), False),
                ('archimedes_gate', p.abs_q_bound, gate, True),
            ]
            for k, const in REMAINDER3_CONSTANTS.items():
                checks.append((f'R{k}_3', abs(remainder3(k, p, truth)), mpf(const) * q_abs ** 3, True))
            for name, value, bound, upper in checks:
                slack = max(abs(value), abs(bound)) * ctx.eps
                rows.append(_bound_row(index, p.tau, name, value, bound, upper, slack))
    frame = pd.DataFrame(rows)
    passed = bool(frame['passed'].all()) if not frame.empty else True
    if not passed:
        failed = frame.loc[~frame['passed'], ['sample', 'check']]
        logger.warning("bound suite violations: %s", failed.to_dict('records'))
    return BoundReport(frame=frame, passed=passed)
