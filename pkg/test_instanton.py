#!/usr/bin/env python3
"""
Tests for scripts/instanton.py
==============================

Measured constants against S = 3 (pi/2)^(4/3) and K = (pi^2/4)^(1/3), the sign
change of A(phi) at 3/10 pi^2 for the cosine cutoff, and the sup J estimate.

Run with pytest, or directly: python test_instanton.py
"""

import math
import sys

import numpy as np
import pytest

from scripts.groundstate import SolveOptions, minimize_ground_state
from scripts.instanton import (
    A_of_cutoff, Cutoff, cutoff_integrals, default_cutoff, discrete_sobolev_constant, discrete_sobolev_estimate,
    eps_min, estimate_S_and_K, fit_intercept, instanton_field, instanton_norms, lambda_root_of_A,
    maximize_J_fiber, sobolev_quotient, supJ_estimate, t_eps_value,
)
from scripts.poisson_reduction import essi_bound_terms, essi_gap
from scripts.radial_core import PhysParams, build_grid
from scripts.solver_config import CONFIG, INSTANTON_K_ORACLE, SOBOLEV_S_ORACLE
from scripts.solver_errors import ConfigurationError, ResolutionError
from scripts.spectral import principal_eigenpair

PARAMS = PhysParams(lam=0.0, q=1.0, R=1.0)


def test_cutoff_integrals():
    """cos(pi r / 2R): int phi'^2 = pi^2 / 8R and int phi^2 = R / 2"""
    print("Testing cutoff integrals...")
    for R in (1.0, 2.0):
        grad_sq, mass_sq = cutoff_integrals(default_cutoff(R))
        assert grad_sq == pytest.approx(math.pi ** 2 / (8.0 * R), rel=1e-12)
        assert mass_sq == pytest.approx(R / 2.0, rel=1e-12)


def test_inadmissible_cutoff():
    print("Testing cutoff validation...")
    with pytest.raises(ConfigurationError):
        Cutoff("tent", 1.0, value=lambda r: 1.0 - r, derivative=lambda r: -1.0 + 0.0 * r)
    with pytest.raises(ConfigurationError):
        Cutoff("no zero", 1.0, value=lambda r: np.cos(r), derivative=lambda r: -np.sin(r))


def test_resolution_guard():
    print("Testing eps below the resolvable minimum...")
    grid = build_grid(1.0, 256)
    minimum = eps_min(grid)
    assert minimum == pytest.approx((CONFIG["resolution_nodes"] / 256.0) ** 2)
    with pytest.raises(ResolutionError) as info:
        instanton_field(0.5 * minimum, default_cutoff(1.0), grid)
    assert info.value.eps_min == minimum
    field = instanton_field(minimum, default_cutoff(1.0), grid)
    assert field.values[0] == pytest.approx(1.0 / math.sqrt(minimum))
    assert field.values[-1] == 0.0


def test_schedule_validation():
    print("Testing eps schedule validation...")
    grid = build_grid(1.0, 256)
    cutoff = default_cutoff(1.0)
    with pytest.raises(ConfigurationError):
        estimate_S_and_K([1e-1, 1e-2], cutoff, grid, PARAMS, with_discrete=False)
    with pytest.raises(ConfigurationError):
        estimate_S_and_K([1e-2, 1e-1, 1e-3], cutoff, grid, PARAMS, with_discrete=False)
    with pytest.raises(ResolutionError):
        estimate_S_and_K([1e-1, 1e-2, 1e-5], cutoff, grid, PARAMS, with_discrete=False)
    with pytest.raises(ConfigurationError):
        estimate_S_and_K([1e-1, 5e-2, 1e-2], cutoff, grid, PARAMS, fit_degree=3, with_discrete=False)


def test_fit_intercept_recovers_polynomial():
    print("Testing the sqrt(eps) fit...")
    x = np.sqrt(np.array([1e-1, 1e-2, 1e-3, 1e-4]))
    intercept, residual = fit_intercept(x, 3.0 + 2.0 * x + x ** 2, 2)
    assert intercept == pytest.approx(3.0, rel=1e-12)
    assert residual < 1e-12


def test_constants_from_instantons():
    """K within 1% and S within 2% at M = 8192 on the default schedule"""
    print("Testing S_est and K_est...")
    grid = build_grid(1.0, 8192)
    estimate = estimate_S_and_K(CONFIG["eps_schedule"], default_cutoff(1.0), grid, PARAMS,
                                fit_degree=2, with_discrete=False)
    assert abs(estimate.K_deviation) < 1e-2
    assert abs(estimate.S_deviation) < 2e-2
    assert estimate.S_disc is None
    assert len(estimate.reports) == len(CONFIG["eps_schedule"])
    # ||grad u_eps||^2 and ||u_eps||_6^2 both blow up like eps^(-1/2)
    smallest = estimate.reports[-1]
    assert abs(smallest.l6_residual) * math.sqrt(smallest.eps) < 1e-2 * estimate.K_est
    # the gradient carries an O(1) term from the cutoff, so only its leading order is checked
    assert abs(smallest.grad_residual) * math.sqrt(smallest.eps) < 1e-1 * estimate.S_est * estimate.K_est


def test_norms_grow_as_eps_shrinks():
    print("Testing instanton norms...")
    grid = build_grid(1.0, 2048)
    reports = [instanton_norms(eps, default_cutoff(1.0), grid, PARAMS) for eps in (1e-1, 1e-2, 1e-3)]
    assert reports[0].grad_sq < reports[1].grad_sq < reports[2].grad_sq
    assert reports[0].l6_sq < reports[1].l6_sq < reports[2].l6_sq
    # the L^2 mass stays bounded
    assert reports[2].l2_sq < reports[0].l2_sq * 10.0


def test_A_root_at_three_tenths():
    """For the cosine cutoff A(phi) vanishes at lambda = 3/10 pi^2 / R^2"""
    print("Testing the root of A(phi)...")
    cutoff = default_cutoff(1.0)
    lambda1 = math.pi ** 2
    root = lambda_root_of_A(cutoff, PARAMS, INSTANTON_K_ORACLE, lambda1)
    assert abs(root - 0.3 * lambda1) < 1e-6 * lambda1
    assert A_of_cutoff(cutoff, PARAMS, INSTANTON_K_ORACLE) == pytest.approx(11.47, abs=5e-3)
    for fraction, sign in ((0.1, 1.0), (0.29, 1.0), (0.31, -1.0), (0.5, -1.0), (0.9, -1.0)):
        A = A_of_cutoff(cutoff, PARAMS.with_lambda(fraction * lambda1), INSTANTON_K_ORACLE)
        assert math.copysign(1.0, A) == sign
    with pytest.raises(ConfigurationError):
        lambda_root_of_A(cutoff, PARAMS, INSTANTON_K_ORACLE, 0.2 * lambda1)
    with pytest.raises(ConfigurationError):
        A_of_cutoff(cutoff, PARAMS, 0.0)


def test_supJ_below_threshold_inside_window():
    """A(phi) < 0 at lambda = lambda_1 / 2, so sup J(t u_eps) falls below (2/5) sqrt(S^3/q)"""
    print("Testing sup J inside the window...")
    grid = build_grid(1.0, 2048)
    params = PARAMS.with_lambda(0.5 * math.pi ** 2)
    cutoff = default_cutoff(1.0)
    estimates = [supJ_estimate(eps, cutoff, params, grid, SOBOLEV_S_ORACLE, INSTANTON_K_ORACLE)
                 for eps in (1e-2, 1e-3)]
    assert any(estimate.below_threshold for estimate in estimates)
    for estimate in estimates:
        assert estimate.A_phi < 0.0
        assert estimate.formula < estimate.threshold


def test_t_eps_scaling():
    """t_eps ||u_eps||_6 tends to (S/q)^(1/4) as eps -> 0"""
    print("Testing t_eps...")
    grid = build_grid(1.0, 4096)
    cutoff = default_cutoff(1.0)
    eps = 1e-4
    t = t_eps_value(eps, cutoff, PARAMS, grid)
    l6 = math.sqrt(instanton_norms(eps, cutoff, grid, PARAMS).l6_sq)
    assert t * l6 == pytest.approx(SOBOLEV_S_ORACLE ** 0.25, rel=2e-2)


def test_discrete_sobolev_constant():
    print("Testing S_disc...")
    grid = build_grid(1.0, 256)
    S_disc = discrete_sobolev_constant(grid)
    assert 0.9 * SOBOLEV_S_ORACLE < S_disc < 1.02 * SOBOLEV_S_ORACLE
    bubble = instanton_field(4.0 * eps_min(grid), default_cutoff(1.0), grid)
    assert S_disc <= sobolev_quotient(bubble) * (1.0 + 1e-12)
    # cached per (R, M)
    assert discrete_sobolev_constant(build_grid(1.0, 256)) == S_disc


def test_discrete_sobolev_minimizer():
    """The descent reaches a critical point; the Poisson bound holds with S_disc at its minimizer"""
    print("Testing the S_disc minimizer...")
    grid = build_grid(1.0, 256)
    estimate = discrete_sobolev_estimate(grid)
    assert math.isfinite(estimate.gradient_norm) and estimate.gradient_norm <= 1e-5
    assert estimate.iterations > 5
    assert estimate.value == pytest.approx(sobolev_quotient(estimate.u), rel=1e-12)
    assert estimate.value < 5.2359
    u = estimate.u.values
    assert u[0] == pytest.approx((4.0 * u[1] - u[2]) / 3.0, rel=1e-12)
    assert u[1] <= u[0] <= 4.0 / 3.0 * u[1]

    bound, grad_phi = essi_bound_terms(estimate.u, PARAMS, estimate.value)
    assert grad_phi > 0.0
    assert essi_gap(estimate.u, PARAMS, estimate.value) >= -1e-12 * bound


def test_supJ_dominates_ground_level():
    """c <= sup_t J(t u_eps) for every resolvable eps (I <= J along each ray)"""
    print("Testing sup J against the ground-state level...")
    grid = build_grid(1.0, 256)
    eigen = principal_eigenpair(grid)
    cutoff = default_cutoff(1.0)
    for lambda_rel in (0.4, 0.5, 0.8):
        params = PhysParams(lam=lambda_rel * eigen.lambda1, q=1.0, R=1.0)
        gs = minimize_ground_state(params, grid, SolveOptions(max_iters=5000, grad_tol=1e-9), eigen)
        assert gs.converged
        for eps in (1e-1, 1e-2, 4.0 * eps_min(grid)):
            estimate = supJ_estimate(eps, cutoff, params, grid, SOBOLEV_S_ORACLE, INSTANTON_K_ORACLE)
            assert estimate.direct >= gs.level_c
            _, direct = maximize_J_fiber(instanton_field(eps, cutoff, grid), params)
            assert direct >= gs.level_c * (1.0 - 1e-10)


def main():
    """Run all tests"""
    print("=" * 50)
    print("INSTANTON TESTS")
    print("=" * 50)

    tests = [
        test_cutoff_integrals,
        test_inadmissible_cutoff,
        test_resolution_guard,
        test_schedule_validation,
        test_fit_intercept_recovers_polynomial,
        test_constants_from_instantons,
        test_norms_grow_as_eps_shrinks,
        test_A_root_at_three_tenths,
        test_supJ_below_threshold_inside_window,
        test_t_eps_scaling,
        test_discrete_sobolev_constant,
        test_discrete_sobolev_minimizer,
        test_supJ_dominates_ground_level,
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
