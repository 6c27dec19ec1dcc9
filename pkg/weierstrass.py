"""
Weierstrass sigma, zeta, wp and wp' on the lattice L_tau = Z + Z tau.

Values come from the Fourier expansions in q = e^{2 pi i tau}; z is first
reduced modulo the lattice into the band |Im z| <= Im(tau)/2 and the
quasi-periodicity laws carry the result back.
"""

import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from math import gcd
from typing import Optional, Tuple

import mpmath
import numpy as np
from mpmath import mpc, mpf

from errors import IdentityFailure, InvalidCM, PoleProximity, ReductionFailure, ZeroDerivative
from mpnum import (Number, PrecisionCtx, cos_c, exp_c, exp_r, nearest_int, ref_pi, relative_residual, sin_c,
                   to_mpc)
from qseries import QPoint, discriminant, eisenstein_auto, qpoint

logger = logging.getLogger(__name__)

I = mpc(0, 1)


@dataclass(frozen=True)
class Lattice:
    """L = Z omega1 + Z omega2, i.e. omega1 * L_tau."""
    omega1: mpc
    omega2: mpc

    @property
    def tau(self) -> mpc:
        return self.omega2 / self.omega1

    @classmethod
    def from_tau(cls, tau: Number, scale: Number = 1) -> 'Lattice':
        scale = to_mpc(scale)
        return cls(omega1=scale, omega2=scale * to_mpc(tau))


@dataclass(frozen=True)
class LatticeInvariants:
    """g2, g3, quasi-periods and discriminant of a lattice with basis (omega1, omega2)."""
    g2: mpc
    g3: mpc
    eta1: mpc
    eta2: mpc
    delta: mpc
    omega1: mpc = mpc(1)
    omega2: mpc = mpc(0, 1)

    def scaled(self, a: Number) -> 'LatticeInvariants':
        """Invariants of a*L: g2 a^-4, g3 a^-6, eta a^-1, Delta a^-12."""
        a = to_mpc(a)
        return replace(
            self,
            g2=self.g2 / a ** 4,
            g3=self.g3 / a ** 6,
            eta1=self.eta1 / a,
            eta2=self.eta2 / a,
            delta=self.delta / a ** 12,
            omega1=self.omega1 * a,
            omega2=self.omega2 * a,
        )


@dataclass(frozen=True)
class DivisionPointSet:
    """m-division points (m set) or C tau-division points (abc set) of L_tau."""
    points: Tuple[mpc, ...]
    m: Optional[int] = None
    abc: Optional[Tuple[int, int, int]] = None

    def __len__(self) -> int:
        return len(self.points)


@lru_cache(maxsize=256)
def invariants_of(p: QPoint, ctx: PrecisionCtx) -> LatticeInvariants:
    """
    Invariants of L_tau from the Eisenstein series.

    g2 = 4/3 pi^4 E4, g3 = 8/27 pi^6 E6, eta1 = pi^2/3 E2 and
    eta2 = eta1 tau - 2 pi i from Legendre's relation.
    """
    with ctx.scope():
        pi = ref_pi(ctx)
        e2 = eisenstein_auto(2, p, ctx).value
        e4 = eisenstein_auto(4, p, ctx).value
        e6 = eisenstein_auto(6, p, ctx).value
        eta1 = pi ** 2 / 3 * e2
        return LatticeInvariants(
            g2=4 * pi ** 4 / 3 * e4,
            g3=8 * pi ** 6 / 27 * e6,
            eta1=eta1,
            eta2=eta1 * p.tau - 2 * pi * I,
            delta=discriminant(p, ctx),
            omega1=mpc(1),
            omega2=p.tau,
        )


def lattice_invariants(lattice: Lattice, ctx: PrecisionCtx) -> LatticeInvariants:
    """Invariants of omega1 * L_tau through the scaling laws."""
    with ctx.scope():
        return invariants_of(qpoint(lattice.tau, ctx), ctx).scaled(lattice.omega1)


def _reduce(z: mpc, p: QPoint) -> Tuple[mpc, int, int]:
    """z = z_red + m + k tau with |Im z_red| <= Im(tau)/2 and |Re z_red| <= 1/2."""
    if not (mpmath.isfinite(z.real) and mpmath.isfinite(z.imag)):
        raise ReductionFailure(f"cannot reduce non-finite z={z}")
    k = nearest_int(z.imag / p.im_tau)
    shifted = z - k * p.tau
    m = nearest_int(shifted.real)
    z_red = shifted - m
    if abs(z_red.imag) > p.im_tau * (mpf(1) / 2 + mpf(2) ** -20):
        raise ReductionFailure(f"z={z} did not land in the band")
    return z_red, m, k


def _check_pole(z: mpc, p: QPoint, ctx: PrecisionCtx) -> None:
    z_red = _reduce(z, p)[0]
    threshold = mpmath.ldexp(mpf(1), -(ctx.bits // 2))
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            if abs(z_red - a - b * p.tau) < threshold:
                raise PoleProximity(f"z={mpmath.nstr(z, 10)} is within 2^-{ctx.bits // 2} of a lattice point")


def _band_point(z: Number, p: QPoint, ctx: PrecisionCtx, reduce: bool) -> Tuple[mpc, int, int]:
    z = to_mpc(z)
    if reduce:
        return _reduce(z, p)
    if abs(z.imag) >= p.im_tau:
        raise ReductionFailure(f"|Im z| >= Im tau for unreduced z={z}")
    return z, 0, 0


def _lambert_sum(p: QPoint, z: mpc, ctx: PrecisionCtx, power: int, odd: bool) -> mpc:
    """
    sum_{m>=1} m^power q^m/(1-q^m) * sin(2 pi m z)  (odd) or  cos(2 pi m z).

    |q^m/(1-q^m)| <= |q|^m/(1-|q|) and |sin|, |cos| <= e^{2 pi m |Im z|}
    give a geometric tail used as the stopping rule.
    """
    pi = ref_pi(ctx)
    w = exp_c(2 * pi * I * z, ctx)
    w_inv = 1 / w
    abs_q = p.abs_q_bound
    base = abs_q * exp_r(2 * pi * abs(z.imag), ctx)
    if base >= 1:
        raise ReductionFailure(f"Fourier sum diverges at z={z}")
    tol = mpmath.ldexp(mpf(1), -(ctx.bits + 16))
    total = mpc(0)
    q_m = mpc(1)
    w_m = mpc(1)
    w_inv_m = mpc(1)
    m = 0
    while True:
        m += 1
        q_m *= p.q
        w_m *= w
        w_inv_m *= w_inv
        trig = (w_m - w_inv_m) / (2 * I) if odd else (w_m + w_inv_m) / 2
        total += m ** power * q_m / (1 - q_m) * trig
        ratio = base * (1 + mpf(1) / (m + 1)) ** power
        if ratio < 1:
            tail = mpf(m + 1) ** power * base ** (m + 1) / ((1 - abs_q) * (1 - ratio))
            if tail < tol * max(1, abs(total)):
                return total


def zeta_w(z: Number, p: QPoint, ctx: PrecisionCtx, reduce: bool = True) -> mpc:
    """
    Weierstrass zeta on L_tau:
    eta1 z + pi cot(pi z) + 4 pi sum q^m/(1-q^m) sin(2 pi m z).

    Raises:
        PoleProximity: z within 2^-(bits/2) of a lattice point
    """
    with ctx.scope():
        z_red, m, k = _band_point(z, p, ctx, reduce)
        _check_pole(z_red, p, ctx)
        inv = invariants_of(p, ctx)
        pi = ref_pi(ctx)
        cot = cos_c(pi * z_red, ctx) / sin_c(pi * z_red, ctx)
        value = inv.eta1 * z_red + pi * cot + 4 * pi * _lambert_sum(p, z_red, ctx, 0, True)
        return value + m * inv.eta1 + k * inv.eta2


def wp(z: Number, p: QPoint, ctx: PrecisionCtx) -> mpc:
    """wp(z) = -eta1 + (pi / sin pi z)^2 - 8 pi^2 sum m q^m/(1-q^m) cos(2 pi m z)."""
    with ctx.scope():
        z_red = _reduce(to_mpc(z), p)[0]
        _check_pole(z_red, p, ctx)
        inv = invariants_of(p, ctx)
        pi = ref_pi(ctx)
        return -inv.eta1 + (pi / sin_c(pi * z_red, ctx)) ** 2 - 8 * pi ** 2 * _lambert_sum(p, z_red, ctx, 1, False)


def wp_prime(z: Number, p: QPoint, ctx: PrecisionCtx) -> mpc:
    """Term-wise derivative of the Fourier form of wp."""
    with ctx.scope():
        z_red = _reduce(to_mpc(z), p)[0]
        _check_pole(z_red, p, ctx)
        pi = ref_pi(ctx)
        s = sin_c(pi * z_red, ctx)
        c = cos_c(pi * z_red, ctx)
        return -2 * pi ** 3 * c / s ** 3 + 16 * pi ** 3 * _lambert_sum(p, z_red, ctx, 2, True)


def wp_second(z: Number, p: QPoint, ctx: PrecisionCtx) -> mpc:
    with ctx.scope():
        z_red = _reduce(to_mpc(z), p)[0]
        _check_pole(z_red, p, ctx)
        pi = ref_pi(ctx)
        s2 = sin_c(pi * z_red, ctx) ** 2
        return 2 * pi ** 4 * (3 - 2 * s2) / s2 ** 2 + 32 * pi ** 4 * _lambert_sum(p, z_red, ctx, 3, False)


def sigma_w(z: Number, p: QPoint, ctx: PrecisionCtx, reduce: bool = True) -> mpc:
    """
    Weierstrass sigma on L_tau from the product
    e^{eta1 z^2/2} sin(pi z)/pi prod (1 - 2 q^n cos 2 pi z + q^2n)/(1 - q^n)^2,
    then sigma(z + w) = (-1)^{m+k+mk} e^{eta(w)(z + w/2)} sigma(z) for w = m + k tau.

    Raises:
        ReductionFailure: z cannot be placed in the convergence band
    """
    with ctx.scope():
        z_red, m, k = _band_point(z, p, ctx, reduce)
        inv = invariants_of(p, ctx)
        pi = ref_pi(ctx)
        w = exp_c(2 * pi * I * z_red, ctx)
        two_cos = w + 1 / w
        abs_q = p.abs_q_bound
        base = abs_q * exp_r(2 * pi * abs(z_red.imag), ctx)
        if base >= 1:
            raise ReductionFailure(f"sigma product diverges at z={z_red}")
        tol = mpmath.ldexp(mpf(1), -(ctx.bits + 16))
        product = mpc(1)
        q_n = mpc(1)
        n = 0
        while True:
            n += 1
            q_n *= p.q
            product *= (1 - q_n * two_cos + q_n ** 2) / (1 - q_n) ** 2
            tail = 4 * base ** (n + 1) / ((1 - abs_q) ** 2 * (1 - base))
            if tail < tol:
                break
        value = exp_c(inv.eta1 * z_red ** 2 / 2, ctx) * sin_c(pi * z_red, ctx) / pi * product
        if m or k:
            omega = m + k * p.tau
            eta = m * inv.eta1 + k * inv.eta2
            sign = -1 if (m + k + m * k) % 2 else 1
            value *= sign * exp_c(eta * (z_red + omega / 2), ctx)
        return value


def measure_eta(p: QPoint, ctx: PrecisionCtx) -> Tuple[mpc, mpc]:
    """eta1, eta2 as zeta differences of the unreduced Fourier form."""
    with ctx.scope():
        z0 = mpc(mpf(1) / 5, -p.im_tau / 2)
        base = zeta_w(z0, p, ctx, reduce=False)
        eta1 = zeta_w(z0 + 1, p, ctx, reduce=False) - base
        eta2 = zeta_w(z0 + p.tau, p, ctx, reduce=False) - base
        return eta1, eta2


def legendre_check(p: QPoint, ctx: PrecisionCtx) -> mpf:
    """|eta1 tau - eta2 - 2 pi i| with both quasi-periods measured."""
    with ctx.scope():
        eta1, eta2 = measure_eta(p, ctx)
        return abs(eta1 * p.tau - eta2 - 2 * ref_pi(ctx) * I)


def de_residual(z: Number, p: QPoint, ctx: PrecisionCtx) -> mpf:
    """|wp'^2 - 4 wp^3 + g2 wp + g3| normalised by max(1, |4 wp^3|)."""
    with ctx.scope():
        inv = invariants_of(p, ctx)
        x = wp(z, p, ctx)
        dx = wp_prime(z, p, ctx)
        residual = abs(dx ** 2 - 4 * x ** 3 + inv.g2 * x + inv.g3)
        return residual / max(1, abs(4 * x ** 3))


def half_period_values(p: QPoint, ctx: PrecisionCtx) -> Tuple[mpc, mpc, mpc]:
    """
    e1, e2, e3 = wp(1/2), wp(tau/2), wp((1+tau)/2).

    Raises:
        IdentityFailure: 4(x-e1)(x-e2)(x-e3) differs from 4x^3 - g2 x - g3
    """
    with ctx.scope():
        inv = invariants_of(p, ctx)
        half = mpf(1) / 2
        e1 = wp(half, p, ctx)
        e2 = wp(p.tau / 2, p, ctx)
        e3 = wp((1 + p.tau) / 2, p, ctx)
        scale = max(1, abs(inv.g2), abs(inv.g3))
        tol = scale * mpmath.ldexp(mpf(1), -(ctx.bits // 2))
        mismatches = [
            abs(e1 + e2 + e3),
            abs(e1 * e2 + e1 * e3 + e2 * e3 + inv.g2 / 4),
            abs(e1 * e2 * e3 - inv.g3 / 4),
        ]
        if max(mismatches) > tol:
            raise IdentityFailure(f"half-period values do not factor 4x^3 - g2 x - g3 (off by {mpmath.nstr(max(mismatches), 5)})")
        return e1, e2, e3


def duplication_check(z: Number, p: QPoint, ctx: PrecisionCtx) -> mpf:
    """
    Max residual of wp'' = 6 wp^2 - g2/2 and wp(2z) = (wp''/wp')^2/4 - 2 wp.

    Raises:
        ZeroDerivative: wp'(z) vanishes to working precision
        PoleProximity: z or 2z in the lattice
    """
    with ctx.scope():
        z = to_mpc(z)
        inv = invariants_of(p, ctx)
        x = wp(z, p, ctx)
        dx = wp_prime(z, p, ctx)
        if abs(dx) < mpmath.ldexp(mpf(1), -(ctx.bits // 4)) * max(1, abs(x)) ** mpf(1.5):
            raise ZeroDerivative(f"wp'({mpmath.nstr(z, 10)}) vanishes")
        ddx = wp_second(z, p, ctx)
        second = abs(ddx - (6 * x ** 2 - inv.g2 / 2)) / max(1, abs(ddx), abs(6 * x ** 2))
        doubled = wp(2 * z, p, ctx)
        duplication = abs(doubled - ((ddx / dx) ** 2 / 4 - 2 * x)) / max(1, abs(doubled))
        return max(second, duplication)


def sigma_addition_check(u: Number, v: Number, p: QPoint, ctx: PrecisionCtx) -> mpf:
    """Residual of wp(v) - wp(u) = sigma(u+v) sigma(u-v) / (sigma(u)^2 sigma(v)^2)."""
    with ctx.scope():
        u, v = to_mpc(u), to_mpc(v)
        lhs = wp(v, p, ctx) - wp(u, p, ctx)
        rhs = (sigma_w(u + v, p, ctx) * sigma_w(u - v, p, ctx)
               / (sigma_w(u, p, ctx) ** 2 * sigma_w(v, p, ctx) ** 2))
        return relative_residual(lhs, rhs)


def sigma_three_term_check(u: Number, u1: Number, u2: Number, u3: Number,
                           p: QPoint, ctx: PrecisionCtx) -> mpf:
    """Weierstrass' three-term sigma relation, normalised by its largest term."""
    with ctx.scope():
        u, u1, u2, u3 = (to_mpc(x) for x in (u, u1, u2, u3))

        def pair(a, b):
            return sigma_w(a + b, p, ctx) * sigma_w(a - b, p, ctx)

        terms = [
            pair(u, u1) * pair(u2, u3),
            pair(u, u2) * pair(u3, u1),
            pair(u, u3) * pair(u1, u2),
        ]
        scale = max(abs(t) for t in terms)
        if scale == 0:
            return mpf(0)
        return abs(sum(terms)) / scale


def sigma_translation_check(z: Number, p: QPoint, ctx: PrecisionCtx) -> mpf:
    """
    sigma(z + w_k) = -exp(eta_k (z + w_k/2)) sigma(z) for w_1 = 1 and
    w_2 = tau, on the unreduced product so the law is not assumed.
    """
    with ctx.scope():
        z = to_mpc(z)
        inv = invariants_of(p, ctx)
        first = relative_residual(
            sigma_w(z + 1, p, ctx, reduce=False),
            -exp_c(inv.eta1 * (z + mpf(1) / 2), ctx) * sigma_w(z, p, ctx, reduce=False),
        )
        z0 = z - p.tau / 2
        second = relative_residual(
            sigma_w(z0 + p.tau, p, ctx, reduce=False),
            -exp_c(inv.eta2 * (z0 + p.tau / 2), ctx) * sigma_w(z0, p, ctx, reduce=False),
        )
        return max(first, second)


def division_points(m: int, p: QPoint, ctx: PrecisionCtx) -> DivisionPointSet:
    """DIV(m) = {k/m + (l/m) tau : 0 <= k, l < m, (k, l) != (0, 0)}."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    with ctx.scope():
        points = tuple(mpf(k) / m + mpf(l) / m * p.tau
                       for l in range(m) for k in range(m) if k or l)
    return DivisionPointSet(points=points, m=m)


def division_points_ctau(A: int, B: int, C: int, p: QPoint, ctx: PrecisionCtx) -> DivisionPointSet:
    """
    C tau-division points u = (k/A) tau + (lA + kB)/(AC) with 0 <= k < A
    and 0 <= lA + kB < AC, excluding u = 0.

    Raises:
        InvalidCM: gcd(A, B, C) != 1 or A + B tau + C tau^2 != 0
    """
    if A <= 0 or C <= 0 or gcd(gcd(A, abs(B)), C) != 1:
        raise InvalidCM(f"({A}, {B}, {C}) is not a primitive relation")
    with ctx.scope():
        relation = A + B * p.tau + C * p.tau ** 2
        if abs(relation) > max(A, abs(B), C) * mpmath.ldexp(mpf(1), -(ctx.bits // 2)):
            raise InvalidCM(f"A + B tau + C tau^2 = {mpmath.nstr(relation, 5)} at tau={p.tau}")
        points = []
        for k in range(A):
            lo = -((k * B) // A)
            hi = -((k * B - A * C) // A)
            for l in range(lo, hi):
                t = l * A + k * B
                if k == 0 and t == 0:
                    continue
                points.append(mpf(k) / A * p.tau + mpf(t) / (A * C))
    return DivisionPointSet(points=tuple(points), abc=(A, B, C))


def lattice_sum_g(k: int, tau: complex, radius: int, omega1: complex = 1.0) -> complex:
    """G_k = sum' w^-k over w = m omega1 + n omega1 tau with |m|, |n| <= radius (float64)."""
    m = np.arange(-radius, radius + 1, dtype=np.float64)
    omega2 = omega1 * tau
    total = 0j
    for n in range(-radius, radius + 1):
        omega = m * omega1 + n * omega2
        if n == 0:
            omega = omega[m != 0]
        total += np.sum(omega ** (-k))
    return complex(total)


def lattice_sum_wp(z: complex, tau: complex, radius: int) -> complex:
    """wp(z) = 1/z^2 + sum' (1/(z-w)^2 - 1/w^2), truncated to |m|, |n| <= radius (float64)."""
    m = np.arange(-radius, radius + 1, dtype=np.float64)
    total = 1 / z ** 2
    for n in range(-radius, radius + 1):
        omega = m + n * tau
        if n == 0:
            omega = omega[m != 0]
        total += np.sum(1 / (z - omega) ** 2 - 1 / omega ** 2)
    return complex(total)
