#!/usr/bin/env python3
"""
Tests for the series catalog, binary splitting and the pi engine
"""

import sys
import os
from fractions import Fraction

import mpmath
import pytest
from mpmath import mpc, mpf

# Add project directory to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

try:
    from mpnum import PrecisionCtx, to_mpf
    from errors import DomainError
    from qseries import qpoint
    from piengine import (FormulaSpec, combine, compute_pi, convergence_profile, digits_per_term, formula_catalog,
                          formula_for, main_theorem_check, pi_from_terms, printed_form_check, split_range,
                          planned_terms, sum_binary_split, sum_exact, sum_naive, tail_bound, term,
                          terms_for, validate_term_ratio)
    print("✅ piengine imported successfully!")
except ImportError as e:
    print(f"❌ Failed to import piengine: {e}")
    sys.exit(1)

CTX = PrecisionCtx(bits=256)
VAN_CEULEN = "3.14159265358979323846264338327950288"
PI_50 = "3.14159265358979323846264338327950288419716939937510"
CATALOG_N = [7, 8, 11, 12, 16, 19, 27, 28, 43, 67, 163]

# N: (printed denominator, printed radical, label)
PRINTED_FORMS = {
    7: (3, 1, 'Chudnovsky 1988'),
    8: (8, 1, 'Borwein 1987'),
    11: (4, 1, 'Chudnovsky 1988'),
    12: (72, 1, 'Ramanujan 1914'),
    16: (48, 2, 'Borwein 1987'),
    19: (12, 1, 'Chudnovsky 1988'),
    27: (36, 1, 'Borwein 1988'),
    28: (162, 1, 'Ramanujan 1914'),
    43: (36, 1, 'Chudnovsky 1988'),
    67: (12, 1, 'Chudnovsky 1988'),
    163: (12, 1, 'Chudnovsky 1988'),
}


def test_catalog_and_printed_forms():
    catalog = formula_catalog()
    assert [spec.N for spec in catalog] == CATALOG_N
    for spec in catalog:
        k, r, label = PRINTED_FORMS[spec.N]
        assert (spec.printed_denominator, spec.printed_radical, spec.label) == (k, r, label)
        assert printed_form_check(spec)


def test_chudnovsky_entry():
    spec = formula_for(163)
    assert spec.j == -640320 ** 3
    assert (spec.p, spec.q) == (13591409, 545140134)
    assert spec.model_dump()['frac'] == '13591409/545140134'


def test_formula_lookup_and_validation():
    with pytest.raises(DomainError):
        formula_for(5)
    with pytest.raises(ValueError):
        FormulaSpec(N=3, j=0, frac=Fraction(1, 3), label='none')
    assert FormulaSpec(N=7, j=-3375, frac='8/63', label='x').frac == Fraction(8, 63)


def test_terms():
    spec = formula_for(7)
    assert term(spec, 0) == spec.frac
    assert term(spec, 1) == (spec.frac + 1) * Fraction(120, -3375)
    with pytest.raises(ValueError):
        term(spec, -1)
    assert validate_term_ratio(120)


@pytest.mark.parametrize("N", [7, 12, 163])
def test_binary_splitting_equals_exact_sum(N):
    spec = formula_for(N)
    assert sum_binary_split(spec, 25).value(spec.q) == sum_exact(spec, 25)


def test_binary_splitting_is_associative():
    spec = formula_for(43)
    whole = split_range(spec, 0, 20)
    for cut in (1, 7, 13, 19):
        merged = combine(split_range(spec, 0, cut), split_range(spec, cut, 20))
        assert (int(merged.P), int(merged.Q), int(merged.T)) == (int(whole.P), int(whole.Q), int(whole.T))
        assert (merged.lo, merged.hi) == (0, 20)
    with pytest.raises(ValueError):
        split_range(spec, 3, 3)


def test_naive_sum_matches_exact_sum():
    spec = formula_for(28)
    exact = sum_exact(spec, 30)
    naive = sum_naive(spec, 30, CTX)
    with CTX.scope():
        assert abs(naive - to_mpf(exact)) < mpf(2) ** -240
    with pytest.raises(ValueError):
        sum_naive(spec, 0, CTX)


def test_process_pool_matches_serial_splitting():
    spec = formula_for(163)
    serial = sum_binary_split(spec, 40)
    pooled = sum_binary_split(spec, 40, workers=2)
    assert (int(pooled.P), int(pooled.Q), int(pooled.T)) == (int(serial.P), int(serial.Q), int(serial.T))


@pytest.mark.parametrize("N, expected", [(163, 14.1816), (8, 0.6656), (67, 7.9303)])
def test_digits_per_term(N, expected):
    assert abs(float(digits_per_term(formula_for(N))) - expected) < 1e-4


def test_terms_for_ten_thousand_digits():
    assert abs(terms_for(formula_for(163), 10 ** 4) - 707) <= 2


def test_planned_terms_extend_slow_series():
    fast, slow = formula_for(163), formula_for(7)
    assert planned_terms(fast, 100) >= terms_for(fast, 100)
    assert planned_terms(slow, 50) > terms_for(slow, 50)
    assert tail_bound(slow, planned_terms(slow, 50)) < mpf(10) ** -50
    with pytest.raises(ValueError):
        planned_terms(fast, 0)


def test_tail_bound_is_tiny_and_shrinking():
    spec = formula_for(163)
    assert tail_bound(spec, 10) < mpf(10) ** -140
    assert tail_bound(spec, 11) < tail_bound(spec, 10)
    exact_tail = sum_exact(spec, 12) - sum_exact(spec, 5)
    assert abs(to_mpf(exact_tail)) <= tail_bound(spec, 5)


@pytest.mark.parametrize("N", CATALOG_N)
def test_every_series_gives_van_ceulen_digits(N):
    assert compute_pi(formula_for(N), 35) == VAN_CEULEN


def test_hundred_digits_agree_across_series():
    first = compute_pi(formula_for(163), 100)
    assert first == compute_pi(formula_for(67), 100)
    assert len(first) == 102
    assert first.startswith(PI_50)


def test_naive_and_binary_splitting_print_the_same_digits():
    spec = formula_for(163)
    assert compute_pi(spec, 300, method='naive') == compute_pi(spec, 300, method='bs')


def test_compute_pi_rejects_bad_arguments():
    with pytest.raises(ValueError):
        compute_pi(formula_for(163), 0)
    with pytest.raises(ValueError):
        pi_from_terms(formula_for(163), 3, CTX, method='taylor')


def test_convergence_profile_gains_fourteen_digits_per_term():
    profile = convergence_profile(formula_for(163), 10, PrecisionCtx(bits=640))
    assert list(profile['n_terms']) == list(range(1, 11))
    for n, correct in zip(profile['n_terms'], profile['correct_digits']):
        assert correct >= 14 * n - 2


@pytest.mark.parametrize("re, im", [(0, None), (0, 1.3), (0.25, 1.4)])
def test_main_theorem(re, im):
    with CTX.scope():
        tau = mpc(mpf(re), mpmath.sqrt(2) if im is None else mpf(im))
    assert main_theorem_check(qpoint(tau, CTX), CTX) < mpf(2) ** -200


def test_main_theorem_needs_certified_region():
    with pytest.raises(DomainError):
        main_theorem_check(qpoint(mpc(0, 1.2), CTX), CTX)


if __name__ == "__main__":
    print("🚀 Testing piengine")
    print("=" * 50)
    sys.exit(pytest.main([__file__, "-v"]))
