#!/usr/bin/env python3
"""
Tests for hypergeometric coefficients, evaluation and the classical identities
"""

import sys
import os
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from mpmath import mpc, mpf

# Add project directory to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

try:
    from mpnum import PrecisionCtx
    from errors import DomainError, OutOfDisc
    from hypergeom import (HG2F1, HG3F2, KUMMER, chud_coeff, clausen_chud_check, clausen_check, coeff_2f1,
                           coeff_3f2, eval_2f1, eval_3f2, kummer_check, ode_recursion_check_2f1,
                           ode_recursion_check_3f2, picard_fuchs_residual, pochhammer, series_coefficients)
    from qseries import qpoint, sample_points
    print("✅ hypergeom imported successfully!")
except ImportError as e:
    print(f"❌ Failed to import hypergeom: {e}")
    sys.exit(1)

CTX = PrecisionCtx(bits=256)
CLAUSEN_3F2 = HG3F2(alpha=Fraction(1, 6), beta=Fraction(5, 6), gamma=Fraction(1, 2), delta=1, eps=1)


def test_pochhammer():
    assert pochhammer(Fraction(1, 2), 3) == Fraction(15, 8)
    assert pochhammer(7, 0) == 1
    assert pochhammer(-2, 3) == 0
    with pytest.raises(DomainError):
        pochhammer(1, -1)


def test_coefficients_by_ratio_match_direct_pochhammer():
    table = series_coefficients(KUMMER, 30)
    assert table[1] == Fraction(5, 144)
    assert all(table[n] == coeff_2f1(KUMMER, n) for n in range(30))
    assert all(series_coefficients(CLAUSEN_3F2, 30)[n] == coeff_3f2(CLAUSEN_3F2, n) for n in range(30))


@pytest.mark.parametrize("n, expected", [
    (0, Fraction(1)),
    (1, Fraction(5, 72)),
    (2, Fraction(1155, 41472)),
])
def test_chud_coeff(n, expected):
    assert chud_coeff(n) == expected


def test_chud_coeff_forms_agree_far_out():
    assert chud_coeff(200) > 0


def test_clausen_identities():
    assert clausen_check(Fraction(1, 12), Fraction(5, 12), 64)
    assert clausen_check(Fraction(1, 3), Fraction(2, 7), 40)
    assert clausen_chud_check(64)


def test_clausen_terminating_parameters():
    assert clausen_check(0, 0, 16)
    assert series_coefficients(HG3F2(alpha=0, beta=0, gamma=0, delta=0, eps=Fraction(1, 2)), 5) == (1, 0, 0, 0, 0)


def test_invalid_lower_parameter_rejected():
    with pytest.raises(ValueError):
        HG2F1(a=1, b=2, c=-3)
    with pytest.raises(ValueError):
        HG3F2(alpha=1, beta=2, gamma=3, delta=0, eps=1)
    # terminates at n = 3, before (-4)_n vanishes
    HG2F1(a=-3, b=1, c=-4)


def test_ode_recursions():
    assert ode_recursion_check_2f1(KUMMER, 64)
    assert ode_recursion_check_2f1(HG2F1(a=Fraction(2, 3), b=Fraction(1, 5), c=Fraction(7, 4)), 32)
    assert ode_recursion_check_3f2(CLAUSEN_3F2, 64)
    assert ode_recursion_check_3f2(HG3F2(alpha=Fraction(1, 2), beta=2, gamma=Fraction(1, 3),
                                         delta=Fraction(3, 2), eps=Fraction(5, 3)), 32)


def test_eval_2f1_against_mpmath():
    z = mpc('0.3', '0.2')
    value = eval_2f1(KUMMER, z, CTX)
    with CTX.scope():
        expected = mpmath.hyp2f1(mpf(1) / 12, mpf(5) / 12, 1, z)
        assert abs(value - expected) < mpf(2) ** -240


def test_eval_3f2_against_mpmath():
    z = mpc('-0.6', '0.1')
    value = eval_3f2(CLAUSEN_3F2, z, CTX)
    with CTX.scope():
        expected = mpmath.hyp3f2(mpf(1) / 6, mpf(5) / 6, mpf(1) / 2, 1, 1, z)
        assert abs(value - expected) < mpf(2) ** -240


def test_eval_derivative_shifts_parameters():
    z = mpc('0.25', '-0.1')
    first = eval_2f1(KUMMER, z, CTX, derivative=1)
    shifted = eval_2f1(HG2F1(a=Fraction(13, 12), b=Fraction(17, 12), c=2), z, CTX)
    with CTX.scope():
        assert abs(first - mpf(5) / 144 * shifted) < mpf(2) ** -240


def test_clausen_holds_numerically():
    z = mpc('0.4', '0.3')
    square = eval_2f1(KUMMER, z, CTX) ** 2
    with CTX.scope():
        assert abs(square - eval_3f2(CLAUSEN_3F2, z, CTX)) < mpf(2) ** -240


def test_terminating_series_is_a_polynomial():
    p = HG2F1(a=-3, b=2, c=5)
    z = Fraction(1, 2)
    exact = sum(coeff_2f1(p, n) * z ** n for n in range(4))
    with CTX.scope():
        assert abs(eval_2f1(p, mpf(1) / 2, CTX) - mpf(exact.numerator) / exact.denominator) < mpf(2) ** -250


def test_out_of_disc():
    with pytest.raises(OutOfDisc):
        eval_2f1(KUMMER, 1, CTX)
    with pytest.raises(OutOfDisc):
        eval_3f2(CLAUSEN_3F2, mpc(0, 1.5), CTX)


def test_kummer_identity():
    with CTX.scope():
        tau = mpc(mpf('0.2'), mpf('1.5'))
    assert kummer_check(qpoint(tau, CTX), CTX) < mpf(2) ** -80


def test_kummer_needs_certified_region():
    with pytest.raises(DomainError):
        kummer_check(qpoint(mpc(0, 1.1), CTX), CTX)


@pytest.mark.parametrize("re, im", [(0, None), (0, '1.3'), ('0.5', '1.5')])
def test_kummer_identity_at_reference_points(re, im):
    with CTX.scope():
        tau = mpc(mpf(re), mpmath.sqrt(2) if im is None else mpf(im))
    assert kummer_check(qpoint(tau, CTX), CTX) < mpf(2) ** -180


def test_kummer_identity_across_the_strip():
    for tau in sample_points(6, np.random.default_rng(5), y_low=1.3, y_high=2.5):
        assert kummer_check(qpoint(tau, CTX), CTX) < mpf(2) ** -180, tau


def test_coefficient_stream_matches_evaluation():
    rng = np.random.default_rng(23)
    for _ in range(5):
        a, b, c = (Fraction(int(n), int(d)) for n, d in
                   zip(rng.integers(1, 12, size=3), rng.integers(2, 13, size=3)))
        p = HG2F1(a=a, b=b, c=c)
        radius, angle = rng.uniform(0.1, 0.5), rng.uniform(0, 6.28)
        with CTX.scope():
            z = mpmath.mpf(float(radius)) * mpmath.expj(mpf(float(angle)))
            partial = sum((mpf(k.numerator) / k.denominator * z ** n
                           for n, k in enumerate(series_coefficients(p, 400))), mpc(0))
            value = eval_2f1(p, z, CTX)
            assert abs(value - partial) < mpf(2) ** -200 * max(1, abs(value)), (a, b, c)
            reference = mpmath.hyp2f1(mpf(a.numerator) / a.denominator, mpf(b.numerator) / b.denominator,
                                      mpf(c.numerator) / c.denominator, z)
            assert abs(value - reference) < mpf(2) ** -200 * max(1, abs(reference)), (a, b, c)


@pytest.mark.parametrize("J", [10, -5, Fraction(125, 27)])
def test_picard_fuchs(J):
    with CTX.scope():
        value = mpf(J.numerator) / J.denominator if isinstance(J, Fraction) else mpf(J)
    assert picard_fuchs_residual(value, CTX) < mpf(2) ** -100


if __name__ == "__main__":
    print("🚀 Testing hypergeom")
    print("=" * 50)
    sys.exit(pytest.main([__file__, "-v"]))
