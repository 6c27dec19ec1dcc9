#!/usr/bin/env python3
"""
Verification suites for the pi pipeline.

Each suite is a method of VerificationRunner registered by name; every
check inside a suite becomes one CheckResult. An exception raised by a
check is recorded as a failure of that check and the run continues.
Run this file directly to execute every suite with a console report.
"""

import logging
import sys
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import mpmath
import numpy as np
import pandas as pd
from mpmath import mpc, mpf
from pydantic import BaseModel

from cmcoeffs import ALLOWED_C, HEEGNER, appendixB_check, cm_point, coefficient_table
from divpoly import (baker_identity_check, division_value_root_check, division_value_sum_check,
                     f_recursion_check, fm_bridge_check, structural_check)
from errors import ChudPiError
from hypergeom import (HG2F1, HG3F2, KUMMER, chud_coeff, clausen_chud_check, clausen_check,
                       kummer_check, ode_recursion_check_2f1, ode_recursion_check_3f2,
                       picard_fuchs_residual)
from mpnum import PrecisionCtx, ref_pi, relative_residual, to_mpc
from piengine import (combine, compute_pi, formula_catalog, formula_for, printed_form_check,
                      split_range, sum_binary_split, sum_exact, sum_naive, main_theorem_check)
from qseries import QPoint, archimedes_check, bound_suite, divisor_bound_check, qpoint, sample_points
from settings import Settings, get_settings
from weierstrass import (Lattice, de_residual, duplication_check, half_period_values,
                         invariants_of, lattice_invariants, lattice_sum_g, lattice_sum_wp,
                         legendre_check, sigma_addition_check, sigma_three_term_check,
                         sigma_translation_check, sigma_w, wp, wp_prime)

logger = logging.getLogger(__name__)

NUMERIC_SHARE = Fraction(1, 3)
PICARD_FUCHS_SHARE = Fraction(2, 5)
LATTICE_SUM_RADIUS = 300
LATTICE_SUM_TOLERANCE = 5e-5
SCALING_BITS = (128, 256, 512)
SCALING_SLOPE_SLACK = 0.1
VAN_CEULEN = "3.14159265358979323846264338327950288"
BOUND_SAMPLES = 100
EXACT_ORDER = 64


def tolerance(bits: int, share=NUMERIC_SHARE) -> mpf:
    """2^-(share * bits)."""
    return mpmath.ldexp(mpf(1), -int(share * bits))


class CheckResult(BaseModel):
    """Outcome of one check."""
    suite: str
    check: str
    passed: bool
    residual: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ''


def _lattices(ctx: PrecisionCtx) -> List[QPoint]:
    with ctx.scope():
        return [
            qpoint(mpc(0, mpmath.sqrt(2)), ctx),
            qpoint(mpc(mpf(1) / 2, mpmath.sqrt(7) / 2), ctx),
            qpoint(mpc(mpf('0.3'), mpf('1.2')), ctx),
        ]


def half_periods(p: QPoint, ctx: PrecisionCtx) -> List[Tuple[str, mpc]]:
    with ctx.scope():
        return [('1/2', mpc(mpf(1) / 2)), ('tau/2', p.tau / 2), ('(1+tau)/2', (1 + p.tau) / 2)]


def wp_even_residual(z: mpc, neg: mpc, p: QPoint, ctx: PrecisionCtx) -> mpf:
    """``neg`` must be -z formed at the working precision."""
    with ctx.scope():
        return relative_residual(wp(neg, p, ctx), wp(z, p, ctx))


def sigma_odd_residual(z: mpc, neg: mpc, p: QPoint, ctx: PrecisionCtx) -> mpf:
    with ctx.scope():
        return relative_residual(sigma_w(neg, p, ctx), -sigma_w(z, p, ctx))


def wp_prime_zero_residual(half: mpc, p: QPoint, ctx: PrecisionCtx) -> mpf:
    """|wp'(half)| against the natural scale |wp(half)|^(3/2)."""
    with ctx.scope():
        scale = max(mpf(1), abs(wp(half, p, ctx)) ** (mpf(3) / 2))
        return abs(wp_prime(half, p, ctx)) / scale


def _fixed_point(p: QPoint, ctx: PrecisionCtx, s: str = '0.31', t: str = '0.47') -> mpc:
    with ctx.scope():
        return mpf(s) + mpf(t) * p.tau


def _kummer_point(ctx: PrecisionCtx) -> QPoint:
    with ctx.scope():
        return qpoint(mpc(mpf('0.2'), mpf('1.5')), ctx)


def scaling_residuals() -> Dict[str, Callable[[PrecisionCtx], mpf]]:
    """Residual-type checks whose error should fall like 2^-bits."""
    def square(ctx):
        return _lattices(ctx)[0]

    return {
        'legendre': lambda ctx: legendre_check(square(ctx), ctx),
        'appendixB[7]': lambda ctx: appendixB_check(7, ctx),
        'sigma_addition': lambda ctx: sigma_addition_check(
            _fixed_point(square(ctx), ctx), _fixed_point(square(ctx), ctx, '0.12', '0.21'), square(ctx), ctx),
        'kummer': lambda ctx: kummer_check(_kummer_point(ctx), ctx),
        'picard-fuchs': lambda ctx: picard_fuchs_residual(10, ctx),
        'main-theorem': lambda ctx: main_theorem_check(square(ctx), ctx),
        'differential_equation': lambda ctx: de_residual(_fixed_point(square(ctx), ctx), square(ctx), ctx),
        'duplication': lambda ctx: duplication_check(_fixed_point(square(ctx), ctx), square(ctx), ctx),
        'bridge[m=4]': lambda ctx: fm_bridge_check(4, _fixed_point(square(ctx), ctx), square(ctx), ctx),
        'baker[m=3]': lambda ctx: baker_identity_check(3, mpc(1, 1), square(ctx), ctx),
        'division_sum[m=3]': lambda ctx: division_value_sum_check(3, square(ctx), ctx),
        'f_recursion[n=2]': lambda ctx: f_recursion_check(2, _fixed_point(square(ctx), ctx), square(ctx), ctx),
    }


class VerificationRunner:
    """
    Runs the named suites at the precision of ``ctx``.

    Random points come from numpy's default_rng seeded from settings, so a
    run is reproducible.
    """

    def __init__(self, ctx: Optional[PrecisionCtx] = None, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.ctx = ctx or PrecisionCtx.from_settings(self.settings)
        self.rng = np.random.default_rng(self.settings.seed)
        self.results: List[CheckResult] = []
        self.suites: Dict[str, Callable[[], None]] = {
            'catalog': self.check_catalog,
            'bounds': self.check_bounds,
            'clausen': self.check_clausen,
            'odes': self.check_odes,
            'kummer': self.check_kummer,
            'picard-fuchs': self.check_picard_fuchs,
            'weierstrass': self.check_weierstrass,
            'divpoly': self.check_divpoly,
            'appendixB': self.check_appendix_b,
            'main-theorem': self.check_main_theorem,
            'engine-equivalence': self.check_engine_equivalence,
            'scaling': self.check_scaling,
        }

    # -- bookkeeping -------------------------------------------------------

    def run(self, names: Optional[Iterable[str]] = None) -> List[CheckResult]:
        """Run the named suites (all when None); catalog always runs first."""
        selected = list(self.suites) if names is None else list(names)
        unknown = [name for name in selected if name not in self.suites]
        if unknown:
            raise KeyError(f"unknown suite(s) {unknown}, expected some of {list(self.suites)}")
        ordered = ['catalog'] + [name for name in selected if name != 'catalog']
        for name in ordered:
            logger.info("running suite %s at %d bits", name, self.ctx.bits)
            try:
                self.suites[name]()
            except Exception as e:  # a suite that cannot even start
                logger.exception("suite %s aborted", name)
                self._add(name, 'setup', False, detail=f"{type(e).__name__}: {e}")
        return self.results

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def report(self) -> pd.DataFrame:
        return pd.DataFrame([r.model_dump() for r in self.results],
                            columns=list(CheckResult.model_fields))

    def _add(self, suite: str, check: str, passed: bool, residual=None, tol=None, detail: str = '') -> None:
        self.results.append(CheckResult(
            suite=suite, check=check, passed=bool(passed),
            residual=None if residual is None else float(residual),
            tolerance=None if tol is None else float(tol),
            detail=detail,
        ))

    def _exact(self, suite: str, check: str, fn: Callable[[], bool]) -> None:
        try:
            self._add(suite, check, fn())
        except (ChudPiError, ArithmeticError, ValueError, AssertionError, LookupError) as e:
            self._add(suite, check, False, detail=f"{type(e).__name__}: {e}")

    def _residual(self, suite: str, check: str, fn: Callable[[], mpf], tol) -> None:
        try:
            value = fn()
            self._add(suite, check, value <= tol, residual=value, tol=tol)
        except (ChudPiError, ArithmeticError, ValueError, AssertionError, LookupError) as e:
            self._add(suite, check, False, tol=tol, detail=f"{type(e).__name__}: {e}")

    def _random_z(self, p: QPoint) -> mpc:
        """A random point s + t tau with s, t in [0.1, 0.9)."""
        s, t = self.rng.uniform(0.1, 0.9, size=2)
        with self.ctx.scope():
            return mpf(float(s)) + mpf(float(t)) * p.tau

    # -- suites --------------------------------------------------------------

    def check_catalog(self) -> None:
        rows = {row.N: row for row in coefficient_table(self.ctx)}
        for spec in formula_catalog():
            self._exact('catalog', f'printed_form[{spec.N}]', lambda spec=spec: printed_form_check(spec))
            row = rows[spec.N]
            self._exact('catalog', f'j[{spec.N}]', lambda spec=spec, row=row: row.j == spec.j)
            self._exact('catalog', f'frac[{spec.N}]', lambda spec=spec, row=row: row.frac == spec.frac)
            self._exact('catalog', f'c[{spec.N}]', lambda row=row: row.c in ALLOWED_C)
            self._exact('catalog', f'b_squared[{spec.N}]',
                        lambda row=row: row.b ** 2 == row.c * row.N * (1728 - row.j) * row.ac ** 4)
            self._add('catalog', f'a_radius[{spec.N}]', row.a_radius < 0.5 and row.a_coarse_radius < 0.01,
                      residual=row.a_radius, tol=0.5)

    def check_bounds(self) -> None:
        taus = sample_points(BOUND_SAMPLES, self.rng)
        points = [qpoint(t, self.ctx) for t in taus] + [qpoint(cm_point(N, self.ctx).tau, self.ctx) for N in HEEGNER]
        report = bound_suite(points, self.ctx)
        for check, group in report.frame.groupby('check', sort=False):
            self._add('bounds', check, bool(group['passed'].all()), residual=float(group['margin'].min()),
                      detail=f"{len(group)} points")
        self._exact('bounds', 'divisor_sigma', lambda: divisor_bound_check(10 ** 4))
        for name, ok in archimedes_check(self.ctx).items():
            self._add('bounds', f'archimedes_{name}', ok)

    def check_clausen(self) -> None:
        self._exact('clausen', 'kummer_parameters', lambda: clausen_check(Fraction(1, 12), Fraction(5, 12), EXACT_ORDER))
        for i in range(10):
            n1, n2 = (int(x) for x in self.rng.integers(1, 12, size=2))
            d1, d2 = (int(x) for x in self.rng.integers(2, 13, size=2))
            a, b = Fraction(n1, d1), Fraction(n2, d2)
            self._exact('clausen', f'random[{a},{b}]', lambda a=a, b=b: clausen_check(a, b, EXACT_ORDER))
        self._exact('clausen', 'terminating[0,0]', lambda: clausen_check(0, 0, EXACT_ORDER))
        self._exact('clausen', 'chudnovsky_coefficients', lambda: clausen_chud_check(EXACT_ORDER))
        self._exact('clausen', 'chud_coeff_forms', lambda: all(chud_coeff(n) is not None for n in range(201)))

    def check_odes(self) -> None:
        self._exact('odes', '2F1[kummer]', lambda: ode_recursion_check_2f1(KUMMER, EXACT_ORDER))
        clausen_3f2 = HG3F2(alpha=Fraction(1, 6), beta=Fraction(5, 6), gamma=Fraction(1, 2), delta=1, eps=1)
        self._exact('odes', '3F2[clausen]', lambda: ode_recursion_check_3f2(clausen_3f2, EXACT_ORDER))
        for i in range(3):
            a, b, c = (Fraction(int(n), int(d)) for n, d in
                       zip(self.rng.integers(1, 12, size=3), self.rng.integers(2, 13, size=3)))
            self._exact('odes', f'2F1[{a},{b};{c}]',
                        lambda a=a, b=b, c=c: ode_recursion_check_2f1(HG2F1(a=a, b=b, c=c), EXACT_ORDER))
            self._exact('odes', f'3F2[{a},{b},{c};{a + 1},{b + c}]',
                        lambda a=a, b=b, c=c: ode_recursion_check_3f2(
                            HG3F2(alpha=a, beta=b, gamma=c, delta=a + 1, eps=b + c), EXACT_ORDER))

    def check_kummer(self) -> None:
        tol = tolerance(self.ctx.bits)
        with self.ctx.scope():
            fixed = [mpc(0, mpmath.sqrt(2)), mpc(0, mpf('1.3')), mpc(mpf(1) / 2, mpf('1.5'))]
        for t in fixed + list(sample_points(3, self.rng, y_low=1.3, y_high=2.5)):
            p = qpoint(t, self.ctx)
            self._residual('kummer', f'tau={mpmath.nstr(p.tau, 6)}', lambda p=p: kummer_check(p, self.ctx), tol)

    def check_picard_fuchs(self) -> None:
        tol = tolerance(self.ctx.bits, PICARD_FUCHS_SHARE)
        for J in (10, -5, Fraction(125, 27)):
            with self.ctx.scope():
                value = to_mpc(J)
            self._residual('picard-fuchs', f'J={J}', lambda value=value: picard_fuchs_residual(value, self.ctx), tol)

    def check_weierstrass(self) -> None:
        ctx = self.ctx
        tol = tolerance(ctx.bits)
        lattices = _lattices(ctx)
        for p in lattices:
            self._residual('weierstrass', f'legendre[{mpmath.nstr(p.tau, 6)}]', lambda p=p: legendre_check(p, ctx), tol)
        for p in lattices[:2]:
            label = mpmath.nstr(p.tau, 6)
            self._exact('weierstrass', f'half_periods[{label}]', lambda p=p: len(half_period_values(p, ctx)) == 3)
            for i in range(3):
                z = self._random_z(p)
                with ctx.scope():
                    neg = -z
                u, v = self._random_z(p), self._random_z(p)
                self._residual('weierstrass', f'differential_equation[{label}#{i}]',
                               lambda z=z, p=p: de_residual(z, p, ctx), tol)
                self._residual('weierstrass', f'wp_even[{label}#{i}]',
                               lambda z=z, neg=neg, p=p: wp_even_residual(z, neg, p, ctx), tol)
                self._residual('weierstrass', f'duplication[{label}#{i}]',
                               lambda z=z, p=p: duplication_check(z, p, ctx), tol)
                self._residual('weierstrass', f'sigma_odd[{label}#{i}]',
                               lambda z=z, neg=neg, p=p: sigma_odd_residual(z, neg, p, ctx), tol)
                self._residual('weierstrass', f'sigma_addition[{label}#{i}]',
                               lambda u=u, v=v, p=p: sigma_addition_check(u, v, p, ctx), tol)
                w1, w2 = self._random_z(p), self._random_z(p)
                self._residual('weierstrass', f'sigma_three_term[{label}#{i}]',
                               lambda u=u, v=v, w1=w1, w2=w2, p=p: sigma_three_term_check(u, v, w1, w2, p, ctx), tol)
                with ctx.scope():
                    band = mpf(float(self.rng.uniform(0.1, 0.9))) + mpf(float(self.rng.uniform(-0.2, 0.2))) * p.tau
                self._residual('weierstrass', f'sigma_translation[{label}#{i}]',
                               lambda z=band, p=p: sigma_translation_check(z, p, ctx), tol)
            for name, half in half_periods(p, ctx):
                self._residual('weierstrass', f'wp_prime_zero[{label},{name}]',
                               lambda half=half, p=p: wp_prime_zero_residual(half, p, ctx), tol)
        p = lattices[0]
        tau = complex(p.tau)
        self._residual('weierstrass', 'lattice_sum_G4', lambda: relative_residual(
            lattice_sum_g(4, tau, LATTICE_SUM_RADIUS), complex(invariants_of(p, ctx).g2 / 60)), LATTICE_SUM_TOLERANCE)
        self._residual('weierstrass', 'lattice_sum_wp', lambda: relative_residual(
            lattice_sum_wp(complex(0.3, 0.2), tau, LATTICE_SUM_RADIUS), complex(wp(mpc('0.3', '0.2'), p, ctx))),
            LATTICE_SUM_TOLERANCE)
        self._residual('weierstrass', 'lattice_scaling_g2', lambda: relative_residual(
            60 * lattice_sum_g(4, tau, LATTICE_SUM_RADIUS, omega1=2.0),
            complex(lattice_invariants(Lattice.from_tau(p.tau, 2), ctx).g2)), LATTICE_SUM_TOLERANCE)

    def check_divpoly(self) -> None:
        ctx = self.ctx
        tol = tolerance(ctx.bits)
        cap = self.settings.divpoly_cap
        self._exact('divpoly', f'structure[m<={cap}]', lambda: structural_check(cap))
        lattices = _lattices(ctx)[:2]
        for p in lattices:
            label = mpmath.nstr(p.tau, 6)
            points = [self._random_z(p) for _ in range(5)]
            for m in range(1, 7):
                for i, z in enumerate(points):
                    self._residual('divpoly', f'bridge[m={m},{label}#{i}]',
                                   lambda m=m, z=z, p=p: fm_bridge_check(m, z, p, ctx), tol)
        p = lattices[0]
        label = mpmath.nstr(p.tau, 6)
        for m in range(2, self.settings.baker_cap + 1):
            self._residual('divpoly', f'baker[m={m}]',
                           lambda m=m: baker_identity_check(m, mpc(1, 1), p, ctx), tol)
        for q in lattices:
            q_label = mpmath.nstr(q.tau, 6)
            for m in range(2, self.settings.numeric_cap + 1):
                self._residual('divpoly', f'division_sum[m={m},{q_label}]',
                               lambda m=m, q=q: division_value_sum_check(m, q, ctx), tol)
        for m in range(2, min(6, self.settings.numeric_cap) + 1):
            self._residual('divpoly', f'monic_roots[m={m}]', lambda m=m: division_value_root_check(m, p, ctx), tol)
        z = self._random_z(p)
        for n in range(2, 5):
            self._residual('divpoly', f'f_recursion[n={n}]', lambda n=n: f_recursion_check(n, z, p, ctx), tol)

    def check_appendix_b(self) -> None:
        tol = tolerance(self.ctx.bits)
        for N in (7, 8, 11, 19):
            self._residual('appendixB', f'N={N}', lambda N=N: appendixB_check(N, self.ctx), tol)

    def check_main_theorem(self) -> None:
        tol = tolerance(self.ctx.bits)
        for t in sample_points(3, self.rng, y_low=1.3, y_high=2.0):
            p = qpoint(t, self.ctx)
            self._residual('main-theorem', f'tau={t:.4f}', lambda p=p: main_theorem_check(p, self.ctx), tol)

    def check_engine_equivalence(self) -> None:
        ctx = self.ctx
        for spec in formula_catalog():
            def equal_sums(spec=spec) -> bool:
                for n in range(1, 33):
                    exact = sum_exact(spec, n)
                    if sum_binary_split(spec, n).value(spec.q) != exact:
                        return False
                    with ctx.scope():
                        reference = mpf(exact.numerator) / exact.denominator
                        if relative_residual(sum_naive(spec, n, ctx), reference) > 4 * ctx.eps:
                            return False
                return True

            def associative(spec=spec) -> bool:
                a, b, c = split_range(spec, 0, 7), split_range(spec, 7, 19), split_range(spec, 19, 32)
                left, right = combine(combine(a, b), c), combine(a, combine(b, c))
                return (left.P, left.Q, left.T) == (right.P, right.Q, right.T)

            self._exact('engine-equivalence', f'methods[{spec.N}]', equal_sums)
            self._exact('engine-equivalence', f'associativity[{spec.N}]', associative)
        chud = formula_for(163)
        self._exact('engine-equivalence', 'deterministic', lambda: compute_pi(chud, 200) == compute_pi(chud, 200))
        self._exact('engine-equivalence', 'van_ceulen', lambda: compute_pi(chud, 35) == VAN_CEULEN)

        def cross_formula() -> bool:
            reference = compute_pi(chud, 200)
            return all(compute_pi(spec, 200) == reference for spec in formula_catalog())

        self._exact('engine-equivalence', 'cross_formula[200]', cross_formula)

        def matches_reference() -> bool:
            ref_ctx = PrecisionCtx.for_digits(220)
            with ref_ctx.scope():
                expected = mpmath.nstr(ref_pi(ref_ctx), 215, strip_zeros=False)
            return compute_pi(chud, 200) == expected[:202]

        self._exact('engine-equivalence', 'machin_reference[200]', matches_reference)

    def check_scaling(self) -> None:
        checks = scaling_residuals()
        for name, residual_at in checks.items():
            def slope_ok(residual_at=residual_at, name=name) -> bool:
                residuals = [residual_at(PrecisionCtx(bits=bits, guard_bits=self.ctx.guard_bits)) for bits in SCALING_BITS]
                if any(r == 0 for r in residuals):
                    logger.debug("scaling %s: exact at some precision %s", name, residuals)
                    return True
                logs = [float(mpmath.log(r, 2)) for r in residuals]
                slope = float(np.polyfit(np.array(SCALING_BITS, dtype=float), np.array(logs), 1)[0])
                logger.debug("scaling %s: slope %.4f", name, slope)
                return abs(slope + 1) <= SCALING_SLOPE_SLACK

            self._exact('scaling', name, slope_ok)


def print_report(results: List[CheckResult]) -> None:
    """Console report with one line per check, grouped by suite."""
    current = None
    for r in results:
        if r.suite != current:
            current = r.suite
            print(f"\n📐 {current}")
        mark = "✅" if r.passed else "❌"
        residual = '' if r.residual is None else f" residual={r.residual:.3e}"
        detail = f" ({r.detail})" if r.detail else ''
        print(f"{mark} {r.check}{residual}{detail}")


def main() -> int:
    print("🔍 Chudnovsky Pi - Verification")
    print("=" * 50)
    runner = VerificationRunner()
    results = runner.run()
    print_report(results)
    print("\n" + "=" * 50)
    failed = [r for r in results if not r.passed]
    if not failed:
        print(f"🎉 All {len(results)} checks passed")
        return 0
    print(f"❌ {len(failed)} of {len(results)} checks failed")
    return 1


if __name__ == "__main__":
    sys.exit(main())
