#!/usr/bin/env python3
"""
Test script for the Toda Ward Lab

This script runs every major component once at a small size: the exact
free-field Ward identities, the identity catalog and the Monte Carlo
estimators, to confirm they work together after installation.
"""

import time
from toda_ward_lab.simulation import fieldsim
from toda_ward_lab.simulation.fieldsim import McParams
from toda_ward_lab.symbolic.algebra import Weight
from toda_ward_lab.verification import ward
from toda_ward_lab.verification.freefield import (
    BoundaryInsertion, BulkInsertion, InsertionConfig, neutral_symbolic_config,
)

def test_free_field():
    """Test the local and global free-field Ward identities"""
    print("\n=== Testing Free-Field Ward Identities ===")
    cfg = neutral_symbolic_config(1, 1)

    for level in (2, 3):
        print(f"\nTesting level {level}...")
        conformal = ward.verify_conformal_ff(level, cfg, ward.SOLVE_WEIGHTS)
        spin3 = ward.verify_spin3_ff(level, cfg, ward.SOLVE_WEIGHTS)
        print(f"Conformal: {conformal.verdict} | Spin-3: {spin3.verdict}")
        if not (conformal.passed and spin3.passed):
            raise AssertionError(f"Ward identity fails at level {level}")

    print("\nTesting global identities...")
    reports = (ward.verify_global_ff(cfg) + ward.verify_local_currents_ff(cfg)
               + ward.verify_current_covariance_ff(cfg))
    failed = [r.name for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} free-field checks pass")
    if failed:
        raise AssertionError(f"Failing checks: {', '.join(failed)}")

def test_catalog():
    """Test the identity catalog and the mutation check"""
    print("\n=== Testing Identity Catalog ===")

    reports = ward.identity_conformance()
    failed = [r.name for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} identities pass")

    print("\nTesting mutation sensitivity...")
    mutations = ward.mutation_sensitivity(count=3)
    detected = sum(1 for r in mutations if ward.mutation_detected(r))
    print(f"{detected}/{len(mutations)} perturbed generators detected")
    if failed or detected != len(mutations):
        raise AssertionError("Catalog or mutation check failed")

def test_monte_carlo():
    """Test the Monte Carlo estimators on a small cloud"""
    print("\n=== Testing Monte Carlo Estimators ===")
    cfg = InsertionConfig(
        bulk=(BulkInsertion(0.3 + 1.0j, Weight(3.0, 3.0)),),
        boundary=(BoundaryInsertion(-0.5, Weight(2.0, 2.0)), BoundaryInsertion(0.8, Weight(2.0, 2.0))),
        mu_bulk=(1.0, 1.0),
        mu_boundary=((0.5, 0.5), (0.5, 0.5)),
        gamma=0.6,
    )
    params = McParams(samples=128, chains=2, bulk_grid=(8, 4), boundary_points=16, batch_size=64)

    print("\nTesting estimate_correlator()...")
    correlator = fieldsim.estimate_correlator(cfg, params)
    print(f"Correlator: {correlator.value:.6g} ± {correlator.stderr:.2g}")

    print("\nTesting kpz_residual()...")
    kpz = fieldsim.kpz_residual(cfg, params)
    print(f"KPZ passed: {fieldsim.kpz_passed(kpz)}")

    print("\nTesting covariance_residual()...")
    covariance = fieldsim.covariance_residual(cfg, (1.0, 0.5, 0.0, 1.0), params)
    print(f"Translation residual: {covariance.value:.3g} ± {covariance.stderr:.2g}")
    if not (fieldsim.kpz_passed(kpz) and fieldsim.covariance_passed(covariance)):
        raise AssertionError("Monte Carlo identities failed")

def run_all_tests():
    """Run all test functions and handle exceptions"""
    tests = [
        ("Free-Field Tests", test_free_field),
        ("Catalog Tests", test_catalog),
        ("Monte Carlo Tests", test_monte_carlo)
    ]

    results = []
    for test_name, test_func in tests:
        print(f"\n{'=' * 50}")
        print(f"Running {test_name}")
        print(f"{'=' * 50}")
        try:
            start_time = time.time()
            test_func()
            end_time = time.time()
            duration = end_time - start_time
            results.append((test_name, "PASSED", f"{duration:.2f}s"))
        except Exception as e:
            results.append((test_name, "FAILED", str(e)))
            print(f"Error in {test_name}: {e}")

    # Print summary
    print(f"\n{'=' * 50}")
    print("Test Summary")
    print(f"{'=' * 50}")
    for name, status, info in results:
        print(f"{name}: {status} ({info})")

if __name__ == "__main__":
    print("=== Toda Ward Lab Test ===")
    print("Testing all components to ensure they work correctly together.")
    print(f"Test started at: {time.strftime('%Y-%m-%d %H:%M:%S')}")

    start_total = time.time()
    run_all_tests()
    end_total = time.time()

    print(f"\nTotal test duration: {end_total - start_total:.2f} seconds")
    print("Test completed.")
