#!/usr/bin/env python3
"""
Example usage of fockcalc

This script builds a small point space, checks a few identities by hand
and then runs the harness programmatically.
"""

import math
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / 'src'))

import numpy as np

from src.utils.logging_config import setup_logging
from src.core.calculus import KernelProcess
from src.core.chainspace import PointSpace
from src.core.ensembles import random_integrand, random_kernel, random_vector
from src.core.fock import frobenius_distance
from src.core.ito import verify_strong_ito, verify_weak_ito
from src.core.kernel import kernel_product
from src.core.orchestrator import orchestrator
from src.core.representation import epsilon
from src.utils.config import HarnessConfig

def main():
    """Example usage of the kernel calculus."""

    # Setup logging
    logger = setup_logging()
    logger.info("Starting example usage")
    rng = np.random.default_rng(2024)

    # Example 1: A point space and its Fock dimension
    print("Example 1: Point space")
    space = PointSpace.uniform(3, multiplicity=[1, 2, 1], initial_dim=2)
    print(f"  n={space.n}, times={[p.time for p in space.points]}, Fock dimension={space.fock_dim()}")

    # Example 2: ε is multiplicative
    print("\nExample 2: ε(X·Y) = ε(X)ε(Y)")
    x, y = random_kernel(space, rng), random_kernel(space, rng)
    residual = frobenius_distance(epsilon(kernel_product(x, y)), epsilon(x).compose(epsilon(y)))
    print(f"  residual {residual:.2e}")

    # Example 3: The Itô formulae for a random counting process
    print("\nExample 3: Itô formulae")
    process = KernelProcess.from_integrand(random_integrand(space, rng))
    strong = verify_strong_ito(process, math.inf)
    weak = verify_weak_ito(process, math.inf, random_vector(space, rng))
    for report in (strong, weak):
        mark = '✓' if report.passed else '✗'
        print(f"  {mark} {report.suite}: residual {report.residual:.2e}")

    # Example 4: A full harness run
    print("\nExample 4: Harness run")
    harness = HarnessConfig(n_points=2, initial_dim=1, seed_count=3)
    report = orchestrator.run(harness)
    print(f"  {len(report.records)} records, {len(report.failed_records)} failed")

    print("\nExample completed!")

if __name__ == "__main__":
    main()
