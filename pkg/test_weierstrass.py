#!/usr/bin/env python3
"""
Tests for the Weierstrass functions on L_tau and the division point sets
"""

import sys
import os

import mpmath
import pytest
from mpmath import mpc, mpf

# Add project directory to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

try:
    from mpnum import PrecisionCtx, relative_residual
    from errors import InvalidCM, PoleProximity, ReductionFailure, ZeroDerivative
    from qseries import qpoint
    from weierstrass import (Lattice, de_residual, division_points, division_points_ctau, duplication_check,
                             half_period_values, invariants_of, lattice_invariants, lattice_sum_g, lattice_sum_wp,
                             legendre_check, measure_eta, sigma_addition_check, sigma_three_term_check,
                             sigma_translation_check, sigma_w, wp, wp_prime, zeta_w)
    print("✅ weierstrass imported successfully!")
except ImportError as e:
    print(f"❌ Failed to import weierstrass: {e}")
    sys.exit(1)

CTX = PrecisionCtx(bits=256)
TOL = mpf(2) ** -160


def _point(re, im):
    with CTX.scope():
        return qpoint(mpc(mpf(re), mpf(im)), CTX)


def _sqrt_point(re, radicand, denominator):
    with CTX.scope():
        return qpoint(mpc(mpf(re), mpmath.sqrt(radicand) / denominator), CTX)


SQUARE = _point(0, 1)
LATTICES = [_sqrt_point(0, 2, 1), _sqrt_point(0.5, 7, 2), _point(0.3, 1.2)]


def _z(s, t, p):
    with CTX.scope():
        return mpf(s) + mpf(t) * p.tau


@pytest.mark.parametrize("p", LATTICES)
def test_legendre_relation(p):
    assert legendre_check(p, CTX) < TOL


def test_measured_quasi_periods_match_eisenstein():
    p = LATTICES[0]
    eta1, eta2 = measure_eta(p, CTX)
    inv = invariants_of(p, CTX)
    assert relative_residual(eta1, inv.eta1) < TOL
    assert relative_residual(eta2, inv.eta2) < TOL


def test_square_lattice_invariants():
    inv = invariants_of(SQUARE, CTX)
    with CTX.scope():
        expected_g2 = mpmath.gamma(mpf(1) / 4) ** 8 / (16 * mpmath.pi ** 2)
        assert abs(inv.g2 / expected_g2 - 1) < TOL
        assert abs(inv.g3) < TOL


@pytest.mark.parametrize("p", LATTICES[:2])
@pytest.mark.parametrize("s, t", [(0.23, 0.41), (0.71, 0.12), (0.5, 0.77)])
def test_differential_equation(p, s, t):
    assert de_residual(_z(s, t, p), p, CTX) < TOL


def test_wp_is_even_and_periodic():
    p = LATTICES[1]
    z = _z(0.37, 0.19, p)
    value = wp(z, p, CTX)
    assert relative_residual(wp(-z, p, CTX), value) < TOL
    with CTX.scope():
        assert relative_residual(wp(z + 1, p, CTX), value) < TOL
        assert relative_residual(wp(z - 2 * p.tau, p, CTX), value) < TOL


def test_wp_prime_vanishes_at_half_periods():
    p = LATTICES[0]
    with CTX.scope():
        halves = [mpf(1) / 2, p.tau / 2, (1 + p.tau) / 2]
    for half in halves:
        assert abs(wp_prime(half, p, CTX)) < TOL * max(1, abs(wp(half, p, CTX))) ** 2


def test_half_period_values_factor_the_cubic():
    e1, e2, e3 = half_period_values(SQUARE, CTX)
    with CTX.scope():
        assert abs(e1 + e2 + e3) < TOL
        assert abs(e1 + e2) < TOL
        assert abs(e3) < TOL
        assert e1.real > 0


def test_duplication_formula():
    p = LATTICES[2]
    assert duplication_check(_z(0.21, 0.33, p), p, CTX) < TOL


def test_duplication_at_half_period_has_zero_derivative():
    with pytest.raises(ZeroDerivative):
        duplication_check(mpf(1) / 2, SQUARE, CTX)


def test_pole_proximity():
    p = LATTICES[0]
    with pytest.raises(PoleProximity):
        wp(0, p, CTX)
    with pytest.raises(PoleProximity):
        with CTX.scope():
            wp(1 + p.tau, p, CTX)
    with pytest.raises(PoleProximity):
        zeta_w(1, p, CTX)


def test_unreduced_sigma_needs_the_band():
    p = LATTICES[0]
    with CTX.scope():
        z = mpf(1) / 4 + p.tau * mpf(3) / 2
    with pytest.raises(ReductionFailure):
        sigma_w(z, p, CTX, reduce=False)


def test_sigma_is_odd_and_normalised_at_origin():
    p = LATTICES[1]
    z = _z(0.29, 0.46, p)
    assert relative_residual(sigma_w(-z, p, CTX), -sigma_w(z, p, CTX)) < TOL
    with CTX.scope():
        small = mpf(10) ** -20
        assert abs(sigma_w(small, p, CTX) / small - 1) < mpf(10) ** -30


@pytest.mark.parametrize("p", LATTICES[:2])
def test_sigma_translation_law(p):
    assert sigma_translation_check(_z(0.43, 0.1, p), p, CTX) < TOL


def test_sigma_addition_formula():
    p = LATTICES[0]
    assert sigma_addition_check(_z(0.31, 0.22, p), _z(0.64, 0.57, p), p, CTX) < TOL


def test_sigma_three_term_relation():
    p = LATTICES[1]
    args = [_z(0.13, 0.27, p), _z(0.52, 0.61, p), _z(0.77, 0.18, p), _z(0.36, 0.83, p)]
    assert sigma_three_term_check(*args, p, CTX) < TOL


@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_division_points_count(m):
    points = division_points(m, LATTICES[0], CTX)
    assert len(points) == m * m - 1
    assert points.m == m


def test_division_points_order_and_bounds():
    with pytest.raises(ValueError):
        division_points(0, SQUARE, CTX)
    points = division_points(2, SQUARE, CTX).points
    with CTX.scope():
        assert points[0] == mpf(1) / 2
        assert points[1] == SQUARE.tau / 2


def test_ctau_division_points_for_seven():
    p = _sqrt_point(0.5, 7, 2)
    points = division_points_ctau(2, -1, 1, p, CTX)
    assert len(points) == 2 * 1 - 1
    assert points.abc == (2, -1, 1)
    with CTX.scope():
        assert abs(points.points[0] - (1 + p.tau) / 2) < TOL


def test_ctau_division_points_rejects_bad_relations():
    p = _sqrt_point(0.5, 7, 2)
    with pytest.raises(InvalidCM):
        division_points_ctau(2, 0, 1, p, CTX)
    with pytest.raises(InvalidCM):
        division_points_ctau(2, -2, 2, p, CTX)


def test_lattice_sums_match_fourier_values():
    p = LATTICES[0]
    tau = complex(p.tau)
    g4 = lattice_sum_g(4, tau, 300)
    assert abs(g4 / complex(invariants_of(p, CTX).g2 / 60) - 1) < 5e-5
    direct = lattice_sum_wp(complex(0.3, 0.2), tau, 300)
    assert abs(direct / complex(wp(mpc('0.3', '0.2'), p, CTX)) - 1) < 5e-5


def test_scaled_lattice_invariants():
    p = LATTICES[0]
    base = invariants_of(p, CTX)
    doubled = lattice_invariants(Lattice.from_tau(p.tau, 2), CTX)
    assert relative_residual(doubled.g2, base.g2 / 16) < TOL
    assert relative_residual(doubled.g3, base.g3 / 64) < TOL
    assert relative_residual(doubled.eta1, base.eta1 / 2) < TOL
    assert doubled.omega1 == 2


if __name__ == "__main__":
    print("🚀 Testing weierstrass")
    print("=" * 50)
    sys.exit(pytest.main([__file__, "-v"]))
