#!/usr/bin/env python3
"""
Tests for scripts/pohozaev.py
=============================

The ball Pohozaev identity as a refinement diagnostic, the Nehari identities,
the concentration radius and the nonexistence probe in each lambda regime.

Run with pytest, or directly: python test_pohozaev.py
"""

import math
import sys
from functools import lru_cache

import numpy as np
import pytest

from scripts.energy import compactness_threshold
from scripts.groundstate import SolveOptions, minimize_ground_state
from scripts.instanton import default_cutoff, instanton_field
from scripts.pohozaev import (
    EVIDENCE_WORDING, OPEN_REGIME_BANNER, boundary_derivative, classify_lambda, concentration_radius,
    eigen_test_defect, nehari_identities_check, nonexistence_probe, pohozaev_components, pohozaev_residual,
)
from scripts.poisson_reduction import solve_phi
from scripts.radial_core import PhysParams, RadialField, build_grid, dirichlet_energy, random_bump_field
from scripts.solver_errors import ConfigurationError, DegenerateFieldError
from scripts.spectral import principal_eigenpair


@lru_cache(maxsize=None)
def _ground_state(M: int):
    grid = build_grid(1.0, M)
    eigen = principal_eigenpair(grid)
    params = PhysParams(lam=0.5 * eigen.lambda1, q=1.0, R=1.0)
    return params, eigen, minimize_ground_state(params, grid, SolveOptions(max_iters=5000, grad_tol=1e-9), eigen)


def test_trivial_solution():
    print("Testing the residual at (0, 0)...")
    grid = build_grid(1.0, 64)
    zero = RadialField.zeros(grid)
    report = pohozaev_residual(zero, zero, PhysParams(lam=3.0, q=1.0, R=1.0))
    assert report.residual == 0.0
    assert report.boundary_u == 0.0 and report.boundary_phi == 0.0
    assert pohozaev_residual(zero, zero, PhysParams(lam=0.0, q=1.0, R=1.0)).lambda_zero


def test_boundary_derivative_is_second_order():
    """u = R^2 - r^2 has u'(R) = -2R, reproduced exactly by the 3-point formula"""
    print("Testing boundary_derivative...")
    for R in (1.0, 2.0):
        u = RadialField.from_function(build_grid(R, 64), lambda r: R ** 2 - r ** 2)
        assert boundary_derivative(u) == pytest.approx(-2.0 * R, rel=1e-12)


def test_residual_positive_for_negative_lambda():
    print("Testing positivity for lambda < 0...")
    grid = build_grid(1.0, 128)
    params = PhysParams(lam=-1.0, q=1.0, R=1.0)
    rng = np.random.default_rng(83)
    for _ in range(50):
        u = random_bump_field(grid, rng)
        phi = solve_phi(u, params).phi
        report = pohozaev_residual(u, phi, params)
        assert report.residual > 0.0
        assert report.residual >= 2.0 * math.pi * report.boundary_u ** 2


def test_nehari_identities():
    print("Testing the Nehari identities...")
    params, eigen, gs = _ground_state(256)
    first, second = nehari_identities_check(gs.u, gs.phi, params)
    assert first <= 1e-6
    assert second <= 1e-9 * gs.level_c

    at_lambda1 = params.with_lambda(eigen.lambda1)
    reduced = solve_phi(eigen.e1, at_lambda1)
    first, second = nehari_identities_check(eigen.e1, reduced.phi, at_lambda1)
    # e_1 is not a solution of the coupled system: the first defect is q N(e_1)
    assert first == pytest.approx(at_lambda1.q * reduced.coupling_n, rel=1e-6)
    assert second <= 1e-9 * reduced.dirichlet_phi


def test_residual_decays_under_refinement():
    """O(h^2): the residual drops by about 4 when M doubles"""
    print("Testing Pohozaev residual refinement...")
    coarse = _ground_state(256)[2]
    fine = _ground_state(512)[2]
    assert coarse.converged and fine.converged
    ratio = abs(coarse.pohozaev_residual) / abs(fine.pohozaev_residual)
    assert 3.0 <= ratio <= 5.0


def test_components_vanish_on_ground_state():
    print("Testing the two halves of the identity...")
    params, _, gs = _ground_state(512)
    components = pohozaev_components(gs.u, gs.phi, params)
    a = dirichlet_energy(gs.u)
    assert abs(components.u_identity) <= 1e-3 * a
    assert abs(components.phi_identity) <= 1e-3 * a
    assert components.flux_u > 0.0 and components.flux_phi > 0.0
    # the halves recombine into the reported residual once the Nehari identities hold
    combined = -(components.u_identity + 0.2 * components.phi_identity)
    assert combined == pytest.approx(gs.pohozaev_residual, rel=1e-6, abs=1e-8)


def test_eigen_test_on_ground_state():
    print("Testing the equation tested against e_1...")
    params, eigen, gs = _ground_state(256)
    test = eigen_test_defect(gs.u, gs.phi, params, eigen)
    assert test.lhs > 0.0 and test.rhs > 0.0
    assert abs(test.defect) <= 1e-6 * test.rhs

    above = params.with_lambda(1.05 * eigen.lambda1)
    phi = solve_phi(eigen.e1, above).phi
    test = eigen_test_defect(eigen.e1, phi, above, eigen)
    assert test.lhs < 0.0 < test.rhs


def test_concentration_radius():
    print("Testing concentration_radius...")
    grid = build_grid(1.0, 256)
    values = np.ones(grid.M + 1)
    values[-1] = 0.0
    uniform = RadialField(grid, values)
    assert abs(concentration_radius(uniform, 0.5) - 2.0 ** (-1.0 / 3.0)) <= grid.h
    assert concentration_radius(uniform, 1.0) == grid.R

    radii = [concentration_radius(uniform, fraction) for fraction in (0.1, 0.3, 0.5, 0.9)]
    assert radii == sorted(radii)

    cutoff = default_cutoff(1.0)
    bubbles = [concentration_radius(instanton_field(eps, cutoff, grid)) for eps in (1e-1, 1e-2, 2e-3)]
    assert bubbles[0] > bubbles[1] > bubbles[2]

    with pytest.raises(DegenerateFieldError):
        concentration_radius(RadialField.zeros(grid))
    for fraction in (0.0, -0.5, 1.5):
        with pytest.raises(ConfigurationError):
            concentration_radius(uniform, fraction)


def test_classify_lambda():
    print("Testing lambda regimes...")
    lambda1 = 10.0
    assert classify_lambda(-1.0, lambda1) == "negative"
    assert classify_lambda(0.0, lambda1) == "zero"
    assert classify_lambda(2.0, lambda1) == "open"
    assert classify_lambda(3.0, lambda1) == "open"
    assert classify_lambda(3.5, lambda1) == "window"
    assert classify_lambda(10.0, lambda1) == "above"
    assert classify_lambda(12.0, lambda1) == "above"


def test_probe_errors_and_window():
    print("Testing probe edge cases...")
    params = PhysParams(lam=-1.0, q=1.0, R=1.0)
    with pytest.raises(ConfigurationError):
        nonexistence_probe(params, [])
    eigen = principal_eigenpair(build_grid(1.0, 64))
    report = nonexistence_probe(params.with_lambda(0.5 * eigen.lambda1), [64], eigen=eigen)
    assert report.regime == "window"
    assert not report.rows and report.obstruction is None


def test_probe_above_lambda1():
    print("Testing the probe for lambda >= lambda_1...")
    eigen = principal_eigenpair(build_grid(1.0, 64))
    for factor in (1.0, 1.05):
        report = nonexistence_probe(PhysParams(lam=factor * eigen.lambda1, q=1.0, R=1.0), [64], eigen=eigen)
        assert report.regime == "above"
        assert report.obstruction <= 0.0
        assert report.eigen_test.lhs <= 0.0 < report.eigen_test.rhs
        assert not report.rows


def test_probe_negative_lambda():
    """lambda = -1: levels stay at or above the threshold while the mass concentrates at grid scale"""
    print("Testing the probe at lambda = -1...")
    params = PhysParams(lam=-1.0, q=1.0, R=1.0)
    report = nonexistence_probe(params, [256, 128, 512], SolveOptions(max_iters=400, grad_tol=1e-9))
    assert report.regime == "negative"
    assert report.banner is None
    assert report.wording == EVIDENCE_WORDING
    assert [row.M for row in report.rows] == [128, 256, 512]
    for row in report.rows:
        assert math.isfinite(row.gradient_norm)
        assert math.isfinite(row.pde_residual)
        assert row.c >= row.threshold * (1.0 - 1e-6)
        assert row.threshold == pytest.approx(compactness_threshold(row.S_disc, params.q))
        assert row.pohozaev_residual > 0.0
    # rho roughly halves each time M doubles
    assert all(ratio >= 1.5 for ratio in report.radius_ratios)


def test_probe_open_regime_banner():
    print("Testing the open regime banner...")
    eigen = principal_eigenpair(build_grid(1.0, 64))
    params = PhysParams(lam=0.2 * eigen.lambda1, q=1.0, R=1.0)
    report = nonexistence_probe(params, [64], SolveOptions(max_iters=200), eigen=eigen)
    assert report.regime == "open"
    assert report.banner == OPEN_REGIME_BANNER
    assert len(report.rows) == 1


def main():
    """Run all tests"""
    print("=" * 50)
    print("POHOZAEV TESTS")
    print("=" * 50)

    tests = [
        test_trivial_solution,
        test_boundary_derivative_is_second_order,
        test_residual_positive_for_negative_lambda,
        test_nehari_identities,
        test_residual_decays_under_refinement,
        test_components_vanish_on_ground_state,
        test_eigen_test_on_ground_state,
        test_concentration_radius,
        test_classify_lambda,
        test_probe_errors_and_window,
        test_probe_above_lambda1,
        test_probe_negative_lambda,
        test_probe_open_regime_banner,
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
