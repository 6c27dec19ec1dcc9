"""
Division polynomials P_m over Z[h2, h3] and their bridges to the
Weierstrass layer (h2 = g2/4, h3 = g3/4).
"""

import logging
import threading
from typing import Dict, Iterable, List, Optional, Tuple

import mpmath
from mpmath import mpc, mpf

from mpnum import Number, PrecisionCtx, relative_residual, to_mpc
from qseries import QPoint
from settings import get_settings
from weierstrass import division_points, invariants_of, sigma_w, wp, wp_prime

logger = logging.getLogger(__name__)

Monomial = Tuple[int, int]


class HPoly:
    """Sparse integer polynomial in h2, h3 keyed by (power of h2, power of h3)."""
    __slots__ = ('terms',)

    def __init__(self, terms: Optional[Dict[Monomial, int]] = None):
        self.terms = {mono: c for mono, c in (terms or {}).items() if c}

    @classmethod
    def constant(cls, value: int) -> 'HPoly':
        return cls({(0, 0): value})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, int):
            other = HPoly.constant(other)
        return isinstance(other, HPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: 'HPoly') -> 'HPoly':
        result = dict(self.terms)
        for mono, c in other.terms.items():
            result[mono] = result.get(mono, 0) + c
        return HPoly(result)

    def __neg__(self) -> 'HPoly':
        return HPoly({mono: -c for mono, c in self.terms.items()})

    def __sub__(self, other: 'HPoly') -> 'HPoly':
        return self + (-other)

    def __mul__(self, other) -> 'HPoly':
        if isinstance(other, int):
            return HPoly({mono: c * other for mono, c in self.terms.items()})
        result: Dict[Monomial, int] = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                mono = (a1 + a2, b1 + b2)
                result[mono] = result.get(mono, 0) + c1 * c2
        return HPoly(result)

    __rmul__ = __mul__

    def evaluate(self, h2: Number, h3: Number):
        return sum((c * h2 ** a * h3 ** b for (a, b), c in self.terms.items()), mpc(0))

    def sorted_terms(self) -> List[Tuple[Monomial, int]]:
        return sorted(self.terms.items(), key=lambda item: (-item[0][0], -item[0][1]))

    def __repr__(self):
        return f"HPoly({dict(self.sorted_terms())!r})"


def _factor_text(name: str, power: int) -> Optional[str]:
    if power == 0:
        return None
    return name if power == 1 else f"{name}^{power}"


class DivPoly:
    """Dense polynomial in x with HPoly coefficients, index = power of x."""
    __slots__ = ('coeffs',)

    def __init__(self, coeffs: Iterable[HPoly] = ()):
        coeffs = list(coeffs)
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        self.coeffs = tuple(coeffs)

    @classmethod
    def from_terms(cls, terms: Dict[Tuple[int, int, int], int]) -> 'DivPoly':
        """Build from {(x power, h2 power, h3 power): coefficient}."""
        degree = max((e for e, _, _ in terms), default=-1)
        coeffs = [dict() for _ in range(degree + 1)]
        for (e, a, b), c in terms.items():
            coeffs[e][(a, b)] = coeffs[e].get((a, b), 0) + c
        return cls(HPoly(c) for c in coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> HPoly:
        return self.coeffs[-1] if self.coeffs else HPoly()

    def coefficient(self, i: int) -> HPoly:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return HPoly()

    def __eq__(self, other):
        return isinstance(other, DivPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: 'DivPoly') -> 'DivPoly':
        size = max(len(self.coeffs), len(other.coeffs))
        return DivPoly(self.coefficient(i) + other.coefficient(i) for i in range(size))

    def __neg__(self) -> 'DivPoly':
        return DivPoly(-c for c in self.coeffs)

    def __sub__(self, other: 'DivPoly') -> 'DivPoly':
        return self + (-other)

    def __mul__(self, other) -> 'DivPoly':
        if isinstance(other, int):
            return DivPoly(c * other for c in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return DivPoly()
        result = [HPoly() for _ in range(len(self.coeffs) + len(other.coeffs) - 1)]
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero():
                    result[i + j] = result[i + j] + a * b
        return DivPoly(result)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> 'DivPoly':
        result = DivPoly([HPoly.constant(1)])
        for _ in range(exponent):
            result = result * self
        return result

    def evaluate(self, x: Number, h2: Number, h3: Number) -> mpc:
        """Horner evaluation at numeric x, h2, h3."""
        value = mpc(0)
        for coeff in reversed(self.coeffs):
            value = value * x + coeff.evaluate(h2, h3)
        return value

    def to_text(self) -> str:
        """Canonical text: monomials by (x power, h2 power, h3 power) descending."""
        parts = []
        for e in range(self.degree, -1, -1):
            for (a, b), c in self.coeffs[e].sorted_terms():
                factors = [f for f in (_factor_text('x', e), _factor_text('h2', a), _factor_text('h3', b)) if f]
                magnitude = abs(c)
                if factors:
                    body = '*'.join(factors) if magnitude == 1 else f"{magnitude}*" + '*'.join(factors)
                else:
                    body = str(magnitude)
                sign = '-' if c < 0 else '+'
                parts.append((sign, body))
        if not parts:
            return '0'
        first_sign, first_body = parts[0]
        text = ('-' if first_sign == '-' else '') + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"DivPoly({self.to_text()})"


ONE = DivPoly([HPoly.constant(1)])
X = DivPoly([HPoly(), HPoly.constant(1)])
# 16 (x^3 - h2 x - h3)^2
CURVE_SQUARED = DivPoly.from_terms({(3, 0, 0): 1, (1, 1, 0): -1, (0, 0, 1): -1}) ** 2 * 16

P3 = DivPoly.from_terms({(4, 0, 0): 3, (2, 1, 0): -6, (1, 0, 1): -12, (0, 2, 0): -1})
P4 = DivPoly.from_terms({
    (6, 0, 0): 2, (4, 1, 0): -10, (3, 0, 1): -40, (2, 2, 0): -10,
    (1, 1, 1): -8, (0, 0, 2): -16, (0, 3, 0): 2,
})


class DivisionPolynomials(object):
    """
    Memoised P_m. Index with [m]; the cache is filled under a lock so
    concurrent readers see complete entries only.
    """

    def __init__(self):
        self._lock = threading.RLock()
        self._cache: Dict[int, DivPoly] = {1: ONE, 2: ONE, 3: P3, 4: P4}

    def __getitem__(self, m: int) -> DivPoly:
        if m < 1:
            raise ValueError(f"division polynomial index must be >= 1, got {m}")
        cached = self._cache.get(m)
        if cached is not None:
            return cached
        with self._lock:
            if m not in self._cache:
                self._cache[m] = self._build(m)
                logger.debug("P_%d built, degree %d", m, self._cache[m].degree)
            return self._cache[m]

    def _build(self, m: int) -> DivPoly:
        k, r = divmod(m - 1, 4)
        # m = 4k + 1 + r with k >= 1
        if r == 0:
            return CURVE_SQUARED * self[2 * k + 2] * self[2 * k] ** 3 - self[2 * k - 1] * self[2 * k + 1] ** 3
        if r == 1:
            return self[2 * k + 1] * (self[2 * k + 3] * self[2 * k] ** 2 - self[2 * k - 1] * self[2 * k + 2] ** 2)
        if r == 2:
            return self[2 * k + 3] * self[2 * k + 1] ** 3 - CURVE_SQUARED * self[2 * k] * self[2 * k + 2] ** 3
        return self[2 * k + 2] * (self[2 * k + 4] * self[2 * k + 1] ** 2 - self[2 * k] * self[2 * k + 3] ** 2)

    def __len__(self):
        return len(self._cache)


_POLYS = DivisionPolynomials()


def pm(m: int) -> DivPoly:
    """Exact P_m, memoised."""
    return _POLYS[m]


def expected_degree(m: int) -> int:
    return (m * m - 4) // 2 if m % 2 == 0 else (m * m - 1) // 2


def leading_magnitude(m: int) -> int:
    """l_m = m/2 for even m, m for odd m."""
    return m // 2 if m % 2 == 0 else m


def structural_check(m_max: int) -> bool:
    """Degree, |leading coefficient| = l_m and zero second coefficient for m <= m_max."""
    if m_max < 1:
        raise ValueError(f"m_max must be >= 1, got {m_max}")
    for m in range(1, m_max + 1):
        poly = pm(m)
        d = expected_degree(m)
        lead = poly.leading
        if poly.degree != d:
            logger.debug("P_%d has degree %d, expected %d", m, poly.degree, d)
            return False
        if lead not in (HPoly.constant(leading_magnitude(m)), HPoly.constant(-leading_magnitude(m))):
            logger.debug("P_%d leading coefficient %r", m, lead)
            return False
        if d >= 1 and not poly.coefficient(d - 1).is_zero():
            logger.debug("P_%d second coefficient %r", m, poly.coefficient(d - 1))
            return False
    return True


def monic_transform(m: int) -> DivPoly:
    """h(x) = P_m(x / l_m) * l_m^(d_m - 1), monic up to sign with integer coefficients."""
    poly = pm(m)
    l_m = leading_magnitude(m)
    d = poly.degree
    if d == 0:
        return DivPoly([HPoly.constant(1 if poly.leading == 1 else -1)])
    coeffs = []
    for i, c in enumerate(poly.coeffs):
        exponent = d - 1 - i
        if exponent >= 0:
            coeffs.append(c * l_m ** exponent)
        else:
            # leading coefficient is +-l_m, divides exactly
            coeffs.append(HPoly({mono: value // l_m for mono, value in c.terms.items()}))
    return DivPoly(coeffs)


def _h_values(p: QPoint, ctx: PrecisionCtx) -> Tuple[mpc, mpc]:
    inv = invariants_of(p, ctx)
    return inv.g2 / 4, inv.g3 / 4


def fm_numeric(m: int, z: Number, p: QPoint, ctx: PrecisionCtx) -> mpc:
    """F_m(z) = sigma(m z) / sigma(z)^(m^2); F_0 = 0."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    with ctx.scope():
        z = to_mpc(z)
        if m == 0:
            return mpc(0)
        return sigma_w(m * z, p, ctx) / sigma_w(z, p, ctx) ** (m * m)


def fm_polynomial(m: int, z: Number, p: QPoint, ctx: PrecisionCtx) -> mpc:
    """(-wp'(z))^[m even] * P_m(wp(z)) with h2 = g2/4, h3 = g3/4."""
    with ctx.scope():
        h2, h3 = _h_values(p, ctx)
        value = pm(m).evaluate(wp(z, p, ctx), h2, h3)
        if m % 2 == 0:
            value *= -wp_prime(z, p, ctx)
        return value


def fm_bridge_check(m: int, z: Number, p: QPoint, ctx: PrecisionCtx) -> mpf:
    """Relative gap between the sigma quotient and its polynomial form."""
    with ctx.scope():
        return relative_residual(fm_numeric(m, z, p, ctx), fm_polynomial(m, z, p, ctx))


def fm_periodicity_check(m: int, z: Number, p: QPoint, ctx: PrecisionCtx) -> mpf:
    """F_m(z + 1) = F_m(z) and F_m(z + tau) = F_m(z)."""
    with ctx.scope():
        z = to_mpc(z)
        base = fm_numeric(m, z, p, ctx)
        return max(relative_residual(fm_numeric(m, z + 1, p, ctx), base),
                   relative_residual(fm_numeric(m, z + p.tau, p, ctx), base))


def _check_cap(m: int, cap: int, what: str) -> None:
    if m > cap:
        raise ValueError(f"{what} is capped at m <= {cap}, got {m}")


def baker_identity_check(m: int, x_sample: Number, p: QPoint, ctx: PrecisionCtx,
                         cap: Optional[int] = None) -> mpf:
    """
    m^2 prod_{u in DIV(m)} (x - wp(u)) against 4(x^3 - h2 x - h3) P_m(x)^2
    (m even) or P_m(x)^2 (m odd) at x_sample.
    """
    _check_cap(m, cap if cap is not None else get_settings().baker_cap, 'baker_identity_check')
    with ctx.scope():
        x = to_mpc(x_sample)
        h2, h3 = _h_values(p, ctx)
        product = mpc(m * m)
        for u in division_points(m, p, ctx).points:
            product *= x - wp(u, p, ctx)
        poly = pm(m).evaluate(x, h2, h3) ** 2
        if m % 2 == 0:
            poly *= 4 * (x ** 3 - h2 * x - h3)
        return relative_residual(product, poly)


def division_value_sum_check(m: int, p: QPoint, ctx: PrecisionCtx, cap: Optional[int] = None) -> mpf:
    """|sum of wp(u) over DIV(m)|."""
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    _check_cap(m, cap if cap is not None else get_settings().numeric_cap, 'division_value_sum_check')
    with ctx.scope():
        return abs(sum((wp(u, p, ctx) for u in division_points(m, p, ctx).points), mpc(0)))


def division_value_root_check(m: int, p: QPoint, ctx: PrecisionCtx, cap: Optional[int] = None) -> mpf:
    """
    Largest normalised |h(l_m wp(u))| over u in DIV(m) for the monic
    transform h, skipping the half periods which are roots of the cubic.
    """
    _check_cap(m, cap if cap is not None else get_settings().numeric_cap, 'division_value_root_check')
    with ctx.scope():
        h2, h3 = _h_values(p, ctx)
        monic = monic_transform(m)
        l_m = leading_magnitude(m)
        worst = mpf(0)
        for u in division_points(m, p, ctx).points:
            if m % 2 == 0 and all(abs(2 * coord - mpmath.nint(2 * coord)) < mpf(2) ** -20
                                  for coord in _coordinates(u, p)):
                continue
            x = l_m * wp(u, p, ctx)
            scale = sum((abs(c.evaluate(h2, h3)) * abs(x) ** i for i, c in enumerate(monic.coeffs)), mpf(0))
            worst = max(worst, abs(monic.evaluate(x, h2, h3)) / max(1, scale))
        return worst


def _coordinates(u: mpc, p: QPoint) -> Tuple[mpf, mpf]:
    """(s, t) with u = s + t tau."""
    t = u.imag / p.im_tau
    return u.real - t * p.tau.real, t


def f_recursion_check(n: int, z: Number, p: QPoint, ctx: PrecisionCtx, cap: Optional[int] = None) -> mpf:
    """
    F_{2n+1} = F_{n+2} F_n^3 - F_{n-1} F_{n+1}^3 and
    F_{2n} F_2 = F_n (F_{n+2} F_{n-1}^2 - F_{n-2} F_{n+1}^2), max relative residual.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    _check_cap(n, cap if cap is not None else get_settings().numeric_cap, 'f_recursion_check')
    with ctx.scope():
        F = {k: fm_numeric(k, z, p, ctx) for k in range(max(0, n - 2), 2 * n + 2)}
        F[2] = fm_numeric(2, z, p, ctx)
        odd = relative_residual(F[2 * n + 1], F[n + 2] * F[n] ** 3 - F[n - 1] * F[n + 1] ** 3)
        even = relative_residual(F[2 * n] * F[2],
                                 F[n] * (F[n + 2] * F[n - 1] ** 2 - F[n - 2] * F[n + 1] ** 2))
        return max(odd, even)

