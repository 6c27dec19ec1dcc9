#!/usr/bin/env python3
"""
Tests for the division polynomial ring and its bridges to sigma and wp
"""

import sys
import os

import mpmath
import pytest
from mpmath import mpc, mpf

# Add project directory to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

try:
    from mpnum import PrecisionCtx
    from qseries import qpoint
    from divpoly import (ONE, P3, P4, X, DivPoly, HPoly, baker_identity_check, division_value_root_check,
                         division_value_sum_check, expected_degree, f_recursion_check, fm_bridge_check,
                         fm_numeric, fm_periodicity_check, leading_magnitude, monic_transform, pm,
                         structural_check)
    print("✅ divpoly imported successfully!")
except ImportError as e:
    print(f"❌ Failed to import divpoly: {e}")
    sys.exit(1)

CTX = PrecisionCtx(bits=256)
TOL = mpf(2) ** -150

P4_TEXT = "2*x^6 - 10*x^4*h2 - 40*x^3*h3 - 10*x^2*h2^2 - 8*x*h2*h3 + 2*h2^3 - 16*h3^2"


def _point():
    with CTX.scope():
        return qpoint(mpc(0, mpmath.sqrt(2)), CTX)


def _z(s, t, p):
    with CTX.scope():
        return mpf(s) + mpf(t) * p.tau


def test_hpoly_arithmetic():
    h2 = HPoly({(1, 0): 1})
    h3 = HPoly({(0, 1): 1})
    square = (h2 + h3) * (h2 - h3)
    assert square == HPoly({(2, 0): 1, (0, 2): -1})
    assert (h2 - h2).is_zero()
    assert 3 * h2 == h2 * 3 == HPoly({(1, 0): 3})
    assert HPoly.constant(5) == 5
    assert square.evaluate(3, 2) == 5


def test_divpoly_arithmetic_and_text():
    poly = (X + ONE) * (X - ONE)
    assert poly.degree == 2
    assert poly.to_text() == "x^2 - 1"
    assert (X ** 3).leading == 1
    assert (poly - poly).to_text() == "0"
    assert DivPoly.from_terms({(1, 1, 0): -1, (0, 0, 1): 4}).to_text() == "-x*h2 + 4*h3"
    assert poly.evaluate(3, 0, 0) == 8


def test_base_polynomials():
    assert pm(1) == ONE
    assert pm(2) == ONE
    assert pm(3) == P3
    assert P3.to_text() == "3*x^4 - 6*x^2*h2 - 12*x*h3 - h2^2"
    assert pm(4) == P4
    assert P4.to_text() == P4_TEXT


@pytest.mark.parametrize("m, degree, lead", [
    (5, 12, 5),
    (6, 16, 3),
    (7, 24, 7),
    (8, 30, 4),
])
def test_degree_and_leading_coefficient(m, degree, lead):
    poly = pm(m)
    assert expected_degree(m) == degree
    assert leading_magnitude(m) == lead
    assert poly.degree == degree
    assert poly.leading in (HPoly.constant(lead), HPoly.constant(-lead))
    assert poly.coefficient(degree - 1).is_zero()


def test_structural_check():
    assert structural_check(16)
    with pytest.raises(ValueError):
        structural_check(0)
    with pytest.raises(ValueError):
        pm(0)


@pytest.mark.parametrize("m", [3, 4, 5, 6])
def test_monic_transform(m):
    h = monic_transform(m)
    assert h.degree == pm(m).degree
    assert h.leading in (HPoly.constant(1), HPoly.constant(-1))
    assert all(isinstance(c, int) for coeff in h.coeffs for c in coeff.terms.values())


def test_monic_transform_evaluates_to_scaled_polynomial():
    h = monic_transform(3)
    x, h2, h3 = mpf('0.7'), mpf('1.3'), mpf('-0.4')
    expected = pm(3).evaluate(x / 3, h2, h3) * 3 ** (pm(3).degree - 1)
    assert abs(h.evaluate(x, h2, h3) - expected) < mpf(2) ** -40


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
def test_sigma_quotient_matches_polynomial(m):
    p = _point()
    assert fm_bridge_check(m, _z(0.23, 0.31, p), p, CTX) < TOL


def test_f_is_elliptic():
    p = _point()
    assert fm_periodicity_check(3, _z(0.17, 0.12, p), p, CTX) < TOL
    assert fm_numeric(0, _z(0.17, 0.12, p), p, CTX) == 0
    with pytest.raises(ValueError):
        fm_numeric(-1, 0.3, p, CTX)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_baker_identity(m):
    p = _point()
    with CTX.scope():
        x = mpc('0.37', '1.21')
    assert baker_identity_check(m, x, p, CTX) < TOL


def test_baker_identity_respects_cap():
    with pytest.raises(ValueError):
        baker_identity_check(5, 0.5, _point(), CTX, cap=4)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_division_values_sum_to_zero(m):
    assert division_value_sum_check(m, _point(), CTX) < TOL


def test_division_value_sum_needs_m_at_least_two():
    with pytest.raises(ValueError):
        division_value_sum_check(1, _point(), CTX)


def test_division_values_sum_to_zero_on_the_seven_lattice():
    with CTX.scope():
        p = qpoint(mpc(mpf(1) / 2, mpmath.sqrt(7) / 2), CTX)
    assert division_value_sum_check(8, p, CTX) < mpf(2) ** -85


@pytest.mark.parametrize("m", [3, 4])
def test_division_values_are_roots(m):
    assert division_value_root_check(m, _point(), CTX) < TOL


@pytest.mark.parametrize("n", [2, 3])
def test_f_recursions(n):
    p = _point()
    assert f_recursion_check(n, _z(0.19, 0.27, p), p, CTX) < TOL


def test_f_recursion_bounds():
    p = _point()
    with pytest.raises(ValueError):
        f_recursion_check(1, 0.3, p, CTX)
    with pytest.raises(ValueError):
        f_recursion_check(9, 0.3, p, CTX, cap=8)


if __name__ == "__main__":
    print("🚀 Testing divpoly")
    print("=" * 50)
    sys.exit(pytest.main([__file__, "-v"]))
