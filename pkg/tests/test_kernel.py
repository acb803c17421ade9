import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.chainspace import PointSpace
from src.core.ensembles import random_kernel, random_quadruple
from src.core.kernel import (Kernel, WeightQuadruple, ampliation_kernel, dumps_kernel, exponential_bound,
                             exponential_kernel, kernel_product, loads_kernel, projective_norm,
                             relative_norm, star_adjoint, unit_kernel)
from src.utils.errors import DimensionMismatchError, PreconditionError

SEEDS = st.integers(min_value=0, max_value=2 ** 32 - 1)
SMALL = PointSpace.uniform(2, multiplicity=[1, 2], initial_dim=2)


def test_random_kernel_is_reproducible(space):
    a = random_kernel(space, 7)
    b = random_kernel(space, 7)
    assert a.support() == b.support()
    assert a.distance(b) == 0.0


def test_full_density_populates_every_table():
    space = PointSpace.uniform(2)
    kernel = random_kernel(space, 0, density=1.0)
    assert len(kernel.blocks) == 25
    assert kernel.max_abs() <= 1.0


def test_zero_magnitude_gives_zero_kernel(space):
    assert random_kernel(space, 3, magnitude=0.0).is_zero()


def test_density_must_be_positive(space):
    with pytest.raises(PreconditionError):
        random_kernel(space, 0, density=0.0)


def test_block_shapes_are_checked(space_multi):
    kernel = Kernel(space_multi, {'.n': np.eye(2)})
    assert kernel.shape('.c') == (2, 1)
    with pytest.raises(DimensionMismatchError):
        Kernel(space_multi, {'.n': np.eye(1)})
    with pytest.raises(DimensionMismatchError):
        Kernel(space_multi, {'x.': np.eye(1)})


@settings(max_examples=15, deadline=None)
@given(seed=SEEDS)
def test_product_is_associative(seed):
    rng = np.random.default_rng(seed)
    x, y, z = (random_kernel(SMALL, rng) for _ in range(3))
    left = kernel_product(kernel_product(x, y), z)
    right = kernel_product(x, kernel_product(y, z))
    assert left.distance(right) < 1e-10


@settings(max_examples=15, deadline=None)
@given(seed=SEEDS)
def test_unit_and_star_laws(seed):
    rng = np.random.default_rng(seed)
    x, y = random_kernel(SMALL, rng), random_kernel(SMALL, rng)
    unit = unit_kernel(SMALL)
    assert kernel_product(unit, x).distance(x) < 1e-12
    assert kernel_product(x, unit).distance(x) < 1e-12
    assert star_adjoint(star_adjoint(x)).distance(x) == 0.0
    lhs = star_adjoint(kernel_product(x, y))
    rhs = kernel_product(star_adjoint(y), star_adjoint(x))
    assert lhs.distance(rhs) < 1e-12


def test_star_swaps_annihilation_and_creation(space_multi):
    block = np.array([[1.0 + 2.0j, 3.0]])
    kernel = Kernel(space_multi, {'.a': block})
    star = star_adjoint(kernel)
    assert star.support() == ['.c']
    assert np.allclose(star.block('.c'), block.conj().T)


def test_ampliation_kernel_is_unit_for_identity(space_multi):
    assert ampliation_kernel(space_multi, np.eye(1)).distance(unit_kernel(space_multi)) == 0.0


@settings(max_examples=15, deadline=None)
@given(seed=SEEDS)
def test_relative_norm_is_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    x, y = random_kernel(SMALL, rng), random_kernel(SMALL, rng)
    alpha, gamma = random_quadruple(SMALL, rng), random_quadruple(SMALL, rng)
    product = relative_norm(kernel_product(x, y), alpha.product(gamma, SMALL))
    assert product <= relative_norm(x, alpha) * relative_norm(y, gamma) * (1 + 1e-12) + 1e-12


def test_relative_norm_of_unit_and_star_transpose(space):
    alpha = WeightQuadruple.constant(space, s=0.5, a=0.2, c=0.3, n=1.0)
    assert relative_norm(unit_kernel(space), alpha) == pytest.approx(1.0)
    kernel = random_kernel(space, 11)
    gamma = random_quadruple(space, 12)
    assert relative_norm(star_adjoint(kernel), gamma) == pytest.approx(relative_norm(kernel, gamma.transposed()))


def test_relative_norm_infinite_off_support(space):
    kernel = Kernel(space, {'a..': np.ones((2, 2))})
    assert relative_norm(kernel, WeightQuadruple.constant(space, a=0.0)) == math.inf


def test_exponential_kernel_is_multiplicative(space):
    alpha, gamma = random_quadruple(space, 1), random_quadruple(space, 2)
    lhs = kernel_product(exponential_kernel(alpha, space), exponential_kernel(gamma, space))
    assert lhs.distance(exponential_kernel(alpha.product(gamma, space), space)) < 1e-12


def test_exponential_kernel_needs_scalar_points(space_multi):
    with pytest.raises(PreconditionError):
        exponential_kernel(random_quadruple(space_multi, 0), space_multi)


def test_projective_norm_preconditions(space):
    kernel = random_kernel(space, 5)
    with pytest.raises(PreconditionError):
        projective_norm(kernel, 0.5, 1.0)
    with pytest.raises(PreconditionError):
        projective_norm(kernel, 1.0, 0.0)
    assert projective_norm(Kernel.zero(space), 1.0, 1.0) == 0.0


def test_exponential_bound_dominates_projective_norm(space, rng):
    kernel = random_kernel(space, rng)
    q = np.full(space.n, 1.5)
    r = np.full(space.n, 0.8)
    alpha = random_quadruple(space, rng, number_cap=q)
    bound = exponential_bound(relative_norm(kernel, alpha), alpha, r, q, space)
    assert projective_norm(kernel, q, r) <= bound * (1 + 1e-12)
    with pytest.raises(PreconditionError):
        exponential_bound(1.0, WeightQuadruple.constant(space, n=2.0), r, q, space)


def test_kernel_json_round_trip(space_multi):
    kernel = random_kernel(space_multi, 9)
    restored = loads_kernel(space_multi, dumps_kernel(kernel))
    assert restored.support() == kernel.support()
    assert restored.distance(kernel) == 0.0
