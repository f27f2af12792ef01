#!/usr/bin/env python3
"""
Tests for scripts/poisson_reduction.py
======================================

The reduction u -> phi_u shares its operator with the u-equation, so the
energy identity and the Green symmetry hold to round-off on random fields.

Run with pytest, or directly: python test_poisson_reduction.py
"""

import sys

import numpy as np
import pytest

from scripts.instanton import discrete_sobolev_constant
from scripts.poisson_reduction import essi_bound_terms, essi_gap, green_symmetry_defect, solve_phi
from scripts.radial_core import PhysParams, RadialField, build_grid, random_bump_field
from scripts.solver_errors import ConfigurationError, DegenerateFieldError

GRID = build_grid(1.0, 256)
PARAMS = PhysParams(lam=0.0, q=1.3, R=1.0)


def test_energy_identity_on_random_fields():
    """||grad phi_u||^2 = q * int |u|^5 phi_u"""
    print("Testing the phi energy identity...")
    rng = np.random.default_rng(2024)
    for _ in range(200):
        reduced = solve_phi(random_bump_field(GRID, rng), PARAMS)
        assert reduced.dirichlet_phi == pytest.approx(PARAMS.q * reduced.coupling_n, rel=1e-12)


def test_phi_nonnegative():
    print("Testing phi_u >= 0...")
    rng = np.random.default_rng(5)
    for _ in range(200):
        phi = solve_phi(random_bump_field(GRID, rng), PARAMS).phi
        assert np.all(phi.values >= 0.0)
        assert phi.values[-1] == 0.0


def test_green_symmetry():
    print("Testing int |u|^5 phi_w = int |w|^5 phi_u...")
    rng = np.random.default_rng(9)
    for _ in range(50):
        u = random_bump_field(GRID, rng)
        w = random_bump_field(GRID, rng)
        reference = solve_phi(u, PARAMS).coupling_n + solve_phi(w, PARAMS).coupling_n
        assert green_symmetry_defect(u, w, PARAMS) <= 1e-10 * reference


def test_scaling():
    """phi_{2u} = 32 phi_u and N(2u) = 1024 N(u)"""
    print("Testing homogeneity of the reduction...")
    rng = np.random.default_rng(13)
    u = random_bump_field(GRID, rng)
    single = solve_phi(u, PARAMS)
    double = solve_phi(u * 2.0, PARAMS)
    np.testing.assert_allclose(double.phi.values, 32.0 * single.phi.values, rtol=1e-10, atol=0.0)
    assert double.coupling_n == pytest.approx(1024.0 * single.coupling_n, rel=1e-10)


def test_linear_in_q():
    print("Testing phi_u proportional to q...")
    u = random_bump_field(GRID, np.random.default_rng(17))
    one = solve_phi(u, PARAMS.with_q(1.0)).phi
    three = solve_phi(u, PARAMS.with_q(3.0)).phi
    np.testing.assert_allclose(three.values, 3.0 * one.values, rtol=1e-12, atol=0.0)


def test_poisson_bound_with_discrete_constant():
    """(q/S_disc^3) ||grad u||^5 bounds ||grad phi_u|| on generic fields"""
    print("Testing the Poisson bound gap...")
    S_disc = discrete_sobolev_constant(GRID)
    rng = np.random.default_rng(21)
    for _ in range(200):
        u = random_bump_field(GRID, rng)
        bound, grad_phi = essi_bound_terms(u, PARAMS, S_disc)
        assert grad_phi > 0.0
        assert essi_gap(u, PARAMS, S_disc) >= -1e-12 * bound


def test_bound_errors():
    print("Testing Poisson bound errors...")
    with pytest.raises(DegenerateFieldError):
        essi_gap(RadialField.zeros(GRID), PARAMS, 5.0)
    u = random_bump_field(GRID, np.random.default_rng(1))
    for S in (0.0, -1.0):
        with pytest.raises(ConfigurationError):
            essi_gap(u, PARAMS, S)


def main():
    """Run all tests"""
    print("=" * 50)
    print("POISSON REDUCTION TESTS")
    print("=" * 50)

    tests = [
        test_energy_identity_on_random_fields,
        test_phi_nonnegative,
        test_green_symmetry,
        test_scaling,
        test_linear_in_q,
        test_poisson_bound_with_discrete_constant,
        test_bound_errors,
    ]

    passed = 0
    for test in tests:
        try:
            test()
            print(f"✓ {test.__name__}")
            passed += 1
        except AssertionError as e:
            print(f"✗ {test.__name__}: {e}")

    print("\n" + "=" * 50)
    print(f"TEST RESULTS: {passed}/{len(tests)} tests passed")
    print("=" * 50)
    return passed == len(tests)


if __name__ == '__main__':
    sys.exit(0 if main() else 1)
