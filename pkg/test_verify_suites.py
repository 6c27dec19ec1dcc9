#!/usr/bin/env python3
"""
Tests for the verification runner
"""

import sys
import os
from fractions import Fraction

import pytest
from mpmath import mpf

# Add project directory to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

try:
    from mpnum import PrecisionCtx
    from errors import DomainError
    from settings import Settings
    from verify_suites import (CheckResult, VerificationRunner, _lattices, _fixed_point, half_periods, print_report,
                               scaling_residuals, sigma_odd_residual, tolerance, wp_even_residual,
                               wp_prime_zero_residual)
    print("✅ verify_suites imported successfully!")
except ImportError as e:
    print(f"❌ Failed to import verify_suites: {e}")
    sys.exit(1)


@pytest.fixture
def runner():
    return VerificationRunner(PrecisionCtx(bits=256), Settings())


def test_tolerance_shares():
    assert tolerance(300) == mpf(2) ** -100
    assert tolerance(250, Fraction(2, 5)) == mpf(2) ** -100


def test_all_suites_registered(runner):
    assert list(runner.suites) == [
        'catalog', 'bounds', 'clausen', 'odes', 'kummer', 'picard-fuchs', 'weierstrass',
        'divpoly', 'appendixB', 'main-theorem', 'engine-equivalence', 'scaling',
    ]


def test_catalog_runs_before_the_selected_suite(runner):
    results = runner.run(['clausen'])
    suites = [r.suite for r in results]
    assert suites[0] == 'catalog'
    assert set(suites) == {'catalog', 'clausen'}
    assert runner.passed, [r for r in results if not r.passed]


def test_unknown_suite_is_rejected(runner):
    with pytest.raises(KeyError):
        runner.run(['nosuch'])


def test_exceptions_become_failed_checks(runner):
    def boom():
        raise DomainError("outside the certified region")

    runner._residual('demo', 'boom', boom, mpf(1))
    runner._exact('demo', 'bad_exact', lambda: 1 // 0 == 0)
    runner._residual('demo', 'fine', lambda: mpf(0), mpf(1))
    failed, zero_division, fine = runner.results
    assert not failed.passed and failed.detail.startswith('DomainError')
    assert not zero_division.passed and zero_division.detail.startswith('ZeroDivisionError')
    assert fine.passed and fine.residual == 0.0
    assert not runner.passed


def test_report_frame_and_console_output(runner, capsys):
    runner._add('demo', 'ok', True, residual=1e-80, tol=1e-70)
    frame = runner.report()
    assert list(frame.columns) == list(CheckResult.model_fields)
    assert frame.loc[0, 'check'] == 'ok'
    print_report(runner.results)
    out = capsys.readouterr().out
    assert "📐 demo" in out
    assert "✅ ok residual=1.000e-80" in out


def test_odes_and_picard_fuchs_suites_pass(runner):
    runner.run(['odes', 'picard-fuchs'])
    assert runner.passed, [r for r in runner.results if not r.passed]


SUITES = ['bounds', 'clausen', 'odes', 'kummer', 'picard-fuchs', 'weierstrass', 'divpoly', 'appendixB',
          'main-theorem', 'engine-equivalence', 'scaling']


@pytest.mark.parametrize("name", SUITES)
def test_each_suite_passes_at_256_bits(runner, name):
    results = runner.run([name])
    assert any(r.suite == name for r in results)
    assert runner.passed, [r for r in results if not r.passed]


def test_symmetry_checks_hold_at_full_precision(runner):
    runner.check_weierstrass()
    by_kind = {}
    for r in runner.results:
        by_kind.setdefault(r.check.split('[')[0], []).append(r)
    for kind in ('wp_even', 'sigma_odd', 'wp_prime_zero'):
        assert by_kind[kind], kind
        assert all(r.passed and r.residual < 1e-60 for r in by_kind[kind]), by_kind[kind]


def test_negation_inside_the_working_precision():
    ctx = PrecisionCtx(bits=256)
    p = _lattices(ctx)[0]
    z = _fixed_point(p, ctx)
    with ctx.scope():
        neg = -z
    assert wp_even_residual(z, neg, p, ctx) < mpf(2) ** -200
    assert sigma_odd_residual(z, neg, p, ctx) < mpf(2) ** -200
    for name, half in half_periods(p, ctx):
        assert wp_prime_zero_residual(half, p, ctx) < mpf(2) ** -200, name


def test_kummer_suite_covers_the_whole_strip(runner):
    runner.check_kummer()
    labels = [r.check for r in runner.results]
    assert 'tau=(0.5 + 1.5j)' in labels
    assert len(labels) == 6
    assert runner.passed, runner.results


def test_division_sums_run_on_both_lattices_up_to_cap(runner):
    runner.check_divpoly()
    top = [r for r in runner.results if r.check.startswith(f'division_sum[m={runner.settings.numeric_cap},')]
    assert len(top) == 2
    assert all(r.passed for r in top), top


def test_scaling_covers_residual_checks():
    assert {'legendre', 'appendixB[7]', 'sigma_addition', 'kummer', 'picard-fuchs', 'main-theorem',
            'differential_equation', 'duplication', 'bridge[m=4]', 'baker[m=3]', 'division_sum[m=3]',
            'f_recursion[n=2]'} <= set(scaling_residuals())


def test_full_run_passes():
    runner = VerificationRunner(PrecisionCtx(bits=256), Settings())
    results = runner.run()
    assert {r.suite for r in results} == {'catalog', *SUITES}
    assert runner.passed, [r for r in results if not r.passed]


if __name__ == "__main__":
    print("🚀 Testing verify_suites")
    print("=" * 50)
    sys.exit(pytest.main([__file__, "-v"]))
