#!/usr/bin/env python3
"""
Test Script for Solver Setup
============================

This script checks that the numerical stack is installed, that sysconfigs
loads the environment, and that every solver module imports cleanly.
"""

import importlib


def test_numerical_stack():
    """Test that numpy, scipy, pandas, tqdm and tenacity are importable"""
    print("Testing numerical stack...")

    try:
        import numpy
        import pandas
        import scipy
        import tenacity  # noqa: F401
        import tqdm  # noqa: F401
        print(f"✓ numpy {numpy.__version__}, scipy {scipy.__version__}, pandas {pandas.__version__}")
        return True

    except ImportError as e:
        print(f"✗ Missing dependency: {e}")
        return False


def test_sysconfigs():
    """Test that sysconfigs work correctly"""
    print("\nTesting sysconfigs...")

    try:
        from sysconfigs.settings import get_env_overrides, get_log_level, get_output_dir
        print("✓ sysconfigs imported successfully")

        overrides = get_env_overrides()
        print(f"✓ Environment overrides: {overrides or 'none'}")
        print(f"✓ Output dir {get_output_dir('spsolve_out')}, log level {get_log_level('INFO')}")
        return True

    except Exception as e:
        print(f"✗ sysconfigs failed: {e}")
        return False


def test_script_imports():
    """Test that solver modules can be imported"""
    print("\nTesting script imports...")

    modules = [
        "scripts.radial_core", "scripts.spectral", "scripts.poisson_reduction", "scripts.energy",
        "scripts.sobolev_descent", "scripts.instanton", "scripts.groundstate", "scripts.pohozaev",
        "scripts.run_config", "scripts.sweep_runner", "scripts.report_writer", "spsolve",
    ]
    try:
        for name in modules:
            importlib.import_module(name)
            print(f"✓ {name} imported successfully")
        return True

    except Exception as e:
        print(f"✗ Script imports failed: {e}")
        return False


def test_default_config():
    """Test that the CONFIG defaults pass validation"""
    print("\nTesting default configuration...")

    try:
        from scripts.run_config import parse_config
        from scripts.solver_errors import ConfigurationError

        for command in ("eigen", "ground", "instanton", "probe", "sweep"):
            parse_config([command])
        print("✓ Defaults valid for every command")
        return True

    except ConfigurationError as e:
        print(f"✗ Default configuration rejected: {e}")
        return False


def main():
    """Run all tests"""
    print("=" * 50)
    print("SOLVER SETUP TEST")
    print("=" * 50)

    tests = [
        test_numerical_stack,
        test_sysconfigs,
        test_script_imports,
        test_default_config,
    ]

    passed = 0
    total = len(tests)

    for test in tests:
        if test():
            passed += 1

    print("\n" + "=" * 50)
    print(f"TEST RESULTS: {passed}/{total} tests passed")

    if passed == total:
        print("✓ All tests passed! The solver is ready to use.")
    else:
        print("✗ Some tests failed. Please check the setup.")

    print("=" * 50)


if __name__ == '__main__':
    main()
