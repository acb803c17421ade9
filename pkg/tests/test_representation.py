import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.chainspace import PointSpace
from src.core.ensembles import random_kernel, random_vector
from src.core.fock import FockOperator
from src.core.kernel import Kernel, kernel_product, unit_kernel
from src.core.representation import (epsilon, epsilon_adjoint_residual, epsilon_homomorphism_residual,
                                     epsilon_unit_residual)

SEEDS = st.integers(min_value=0, max_value=2 ** 32 - 1)
SPACES = [
    PointSpace.uniform(3, initial_dim=2),
    PointSpace.uniform(2, multiplicity=[2, 1], initial_dim=1, weights=[0.3, 1.7]),
]


@pytest.mark.parametrize('space', SPACES)
def test_unit_represents_identity(space):
    assert epsilon_unit_residual(space) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=SEEDS, which=st.sampled_from([0, 1]))
def test_star_represents_adjoint(seed, which):
    kernel = random_kernel(SPACES[which], seed)
    assert epsilon_adjoint_residual(kernel) < 1e-12 * max(1.0, epsilon(kernel).norm())


@settings(max_examples=20, deadline=None)
@given(seed=SEEDS, which=st.sampled_from([0, 1]))
def test_product_represents_composition(seed, which):
    rng = np.random.default_rng(seed)
    x, y = random_kernel(SPACES[which], rng), random_kernel(SPACES[which], rng)
    scale = max(1.0, epsilon(x).norm() * epsilon(y).norm())
    assert epsilon_homomorphism_residual(x, y) < 1e-10 * scale


def test_shared_atoms_need_point_mass_terms():
    space = PointSpace.uniform(1, horizon=0.5)
    creation = Kernel(space, {'c': np.eye(1)})
    annihilation = Kernel(space, {'a': np.eye(1)})
    assert epsilon_homomorphism_residual(creation, annihilation) < 1e-14
    assert epsilon_homomorphism_residual(creation, annihilation, point_mass=False) > 0.1
    # ε(c)ε(a) is Δ times the number projection
    product = kernel_product(creation, annihilation)
    assert product.support() == ['n']
    assert product.block('n')[0, 0] == pytest.approx(0.5)


def test_empty_table_acts_on_vacuum_sector(space):
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    op = epsilon(Kernel(space, {'...': a}))
    vacuum = np.zeros(space.fock_dim(), dtype=complex)
    vacuum[:2] = [1.0, 0.0]
    assert np.allclose(op.matrix @ vacuum, np.concatenate([a[:, 0], np.zeros(space.fock_dim() - 2)]))


def test_zero_space_representation(empty_space, rng):
    a = rng.normal(size=(2, 2))
    op = epsilon(Kernel(empty_space, {'': a}))
    assert np.allclose(op.matrix, a)
    assert epsilon_unit_residual(empty_space) == 0.0


def test_unit_kernel_acts_as_identity_on_vectors(space, rng):
    chi = random_vector(space, rng)
    assert np.allclose(epsilon(unit_kernel(space)).apply(chi).data, chi.data)
    assert isinstance(epsilon(unit_kernel(space)), FockOperator)
