import numpy as np
import pytest

from src.core.ensembles import disc, random_vector
from src.core.fock import (FockOperator, FockVector, QField, WeightFunction, extend_free, point_evaluation,
                           point_insertion, q_tensor, restrict_free, vacuum_projector, weighted_norm,
                           weighted_operator_norm)
from src.utils.errors import DimensionMismatchError, PreconditionError


def test_fock_dimension(space, space_multi):
    assert space.fock_dim() == 2 * 2 ** 3
    assert space_multi.fock_dim() == 1 * 2 * 3
    assert FockVector.zeros(space_multi).data.size == 6


def test_vacuum_has_unit_norm(space):
    vacuum = FockVector.vacuum(space)
    assert vacuum.norm() == pytest.approx(1.0)
    assert vacuum.inner(vacuum) == pytest.approx(1.0)


def test_inner_product_carries_chain_weights(space_multi):
    chi = FockVector.zeros(space_multi)
    chi.data[chi.layout.sector((2,))] = [1.0, 1.0]
    assert chi.inner(chi) == pytest.approx(2 * 0.7)


def test_adjoint_is_hilbert_adjoint_for_weighted_pairing(space_multi, rng):
    dim = space_multi.fock_dim()
    op = FockOperator(space_multi, disc(rng, (dim, dim)))
    psi = random_vector(space_multi, rng)
    chi = random_vector(space_multi, rng)
    assert op.apply(psi).inner(chi) == pytest.approx(psi.inner(op.adjoint().apply(chi)))
    assert np.allclose(op.adjoint().adjoint().matrix, op.matrix)


def test_point_evaluation_and_insertion_are_inverse(space_multi, rng):
    chi = random_vector(space_multi, rng)
    for x in space_multi.ids:
        evaluated = point_evaluation(chi, x)
        assert evaluated.h == space_multi.multiplicity(x) * chi.h
        rebuilt = point_insertion(evaluated, space_multi, x) + extend_free(restrict_free(chi, x), space_multi, x)
        assert np.allclose(rebuilt.data, chi.data)


def test_evaluation_splits_the_norm(space_multi, rng):
    chi = random_vector(space_multi, rng)
    x = 2
    free = restrict_free(chi, x).norm() ** 2
    point = point_evaluation(chi, x).norm() ** 2
    assert free + space_multi.weight(x) * point == pytest.approx(chi.norm() ** 2)


def test_q_tensor_of_identity_and_zero(space_multi):
    identity = q_tensor(QField.identity(space_multi), space_multi)
    assert np.allclose(identity.matrix, np.eye(space_multi.fock_dim()))
    vacuum = vacuum_projector(space_multi)
    assert np.isclose(np.trace(vacuum.matrix), space_multi.initial_dim)


def test_q_field_validation(space_multi):
    with pytest.raises(DimensionMismatchError):
        QField.identity(space_multi.without(2)).validate(space_multi)
    assert QField.identity(space_multi).is_projector()
    assert not QField.scalar(space_multi, 2.0).is_projector()


def test_weighted_norms(space, rng):
    chi = random_vector(space, rng)
    assert weighted_norm(chi) == pytest.approx(chi.norm())
    assert weighted_norm(chi, 2.0) >= chi.norm()
    identity = FockOperator.identity(space)
    assert weighted_operator_norm(identity) == pytest.approx(1.0)
    # ‖I‖_p = max over chains of p(ϑ)^{-1}
    assert weighted_operator_norm(identity, WeightFunction.constant(space, 2.0)) == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        WeightFunction(np.array([1.0, 0.0, 1.0]))


def test_shape_mismatches(space, space_multi):
    with pytest.raises(DimensionMismatchError):
        FockVector(space, np.zeros(3))
    with pytest.raises(DimensionMismatchError):
        FockOperator.identity(space).apply(FockVector.zeros(space_multi))
    with pytest.raises(DimensionMismatchError):
        FockVector.zeros(space) + FockVector.zeros(space_multi)
