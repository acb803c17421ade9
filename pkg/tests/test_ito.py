import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.calculus import KernelProcess, germ
from src.core.chainspace import PointSpace
from src.core.ensembles import (QFieldSpec, make_q_field, q_adapted_process, random_integrand,
                                random_kernel, random_single_integrand, random_vector)
from src.core.fock import QField
from src.core.ito import (check_q_adapted, conjugate_process, multiplication_table_residual,
                          product_closure_witness, q_adapted_germ, verify_q_adapted_ito,
                          verify_strong_ito, verify_weak_ito, weak_ito_lhs, weak_ito_rhs,
                          wiener_measure, wiener_process, wiener_split_terms, wiener_suite,
                          wiener_windows)
from src.utils.errors import PreconditionError

SEEDS = st.integers(min_value=0, max_value=2 ** 32 - 1)
SCALAR = PointSpace.uniform(3, initial_dim=2)
MULTI = PointSpace.uniform(2, multiplicity=[2, 1], initial_dim=1, weights=[0.3, 0.9])


def _single_process(space, rng):
    return KernelProcess.from_single_integrand(random_kernel(space, rng), random_single_integrand(space, rng))


@settings(max_examples=10, deadline=None)
@given(seed=SEEDS, which=st.sampled_from(['scalar', 'multi']))
def test_strong_formula_for_counting_processes(seed, which):
    space = SCALAR if which == 'scalar' else MULTI
    rng = np.random.default_rng(seed)
    process = KernelProcess.from_integrand(random_integrand(space, rng))
    report = verify_strong_ito(process, math.inf, seed=seed)
    assert report.passed, report.residuals
    assert report.suite == 'strong_ito'


def test_strong_formula_at_every_cut(rng):
    process = _single_process(MULTI, rng)
    for t in MULTI.cut_times():
        report = verify_strong_ito(process, t)
        assert report.passed, (t, report.residuals)
        assert report.residuals['corners'] < 1e-12


def test_strong_formula_before_first_point_is_trivial(rng):
    process = _single_process(SCALAR, rng)
    report = verify_strong_ito(process, 0.0)
    assert report.residual == 0.0


def test_strong_residual_is_unitarily_invariant(rng):
    process = KernelProcess.from_integrand(random_integrand(SCALAR, rng))
    u, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    plain = verify_strong_ito(process, math.inf)
    rotated = verify_strong_ito(conjugate_process(process, u), math.inf)
    assert rotated.passed
    assert abs(rotated.residuals['strong'] - plain.residuals['strong']) < 1e-9


@settings(max_examples=10, deadline=None)
@given(seed=SEEDS, which=st.sampled_from(['scalar', 'multi']))
def test_weak_formula(seed, which):
    space = SCALAR if which == 'scalar' else MULTI
    rng = np.random.default_rng(seed)
    process = _single_process(space, rng)
    chi = random_vector(space, rng)
    report = verify_weak_ito(process, math.inf, chi, seed=seed)
    assert report.passed, report.residuals


def test_weak_sides_agree(rng):
    process = KernelProcess.from_integrand(random_integrand(MULTI, rng))
    chi = random_vector(MULTI, rng)
    exact, display = weak_ito_rhs(process, math.inf, chi)
    lhs = weak_ito_lhs(process, math.inf, chi)
    assert exact == pytest.approx(lhs, rel=1e-9, abs=1e-9)
    assert display == pytest.approx(lhs, rel=1e-9, abs=1e-9)


def test_multiplication_table_reassembles_product(rng):
    process = _single_process(MULTI, rng)
    for x in MULTI.ids:
        assert multiplication_table_residual(process, x) < 1e-12


@pytest.mark.parametrize('kind', ['identity', 'projector', 'zero', 'scalar'])
def test_q_adapted_formula(kind):
    field = make_q_field(SCALAR, QFieldSpec(kind, rank=1, value=0.5), 3)
    process = q_adapted_process(SCALAR, field, 4)
    chi = random_vector(SCALAR, 5)
    check_q_adapted(process, field)
    report = verify_q_adapted_ito(process, field, math.inf, chi=chi)
    assert not report.skipped
    assert report.passed, report.residuals
    assert report.residuals['q_commutator'] < 1e-9


def test_q_adapted_germ_factorizes(rng):
    field = make_q_field(MULTI, QFieldSpec('projector'), rng)
    process = q_adapted_process(MULTI, field, rng)
    for x in MULTI.ids:
        assert germ(process, x)[0].distance(q_adapted_germ(process, field, x)) < 1e-12


def test_non_adapted_process_is_skipped(rng):
    process = KernelProcess.from_integrand(random_integrand(SCALAR, rng, density=1.0))
    field = QField.identity(SCALAR)
    with pytest.raises(PreconditionError):
        check_q_adapted(process, field)
    report = verify_q_adapted_ito(process, field, math.inf)
    assert report.skipped
    assert report.passed
    assert 'skip_reason' in report.parameters


def test_projector_products_stay_adapted(rng):
    field = make_q_field(SCALAR, QFieldSpec('projector'), rng)
    report = verify_q_adapted_ito(q_adapted_process(SCALAR, field, rng), field, math.inf)
    assert report.parameters['product_q_adapted'] is True
    assert report.residuals['product_closure'] == 0.0


def test_non_projector_fields_lose_product_closure():
    assert product_closure_witness(SCALAR, 0, scale=2.0) is not None



def test_wiener_measures_commute():
    space = PointSpace.uniform(3, initial_dim=1)
    measures = [wiener_measure(space, w) for w in wiener_windows(space)]
    assert len(measures) == 6
    for a in measures:
        for b in measures:
            assert np.abs(a.compose(b).matrix - b.compose(a).matrix).max() < 1e-12


def test_wiener_split_and_adapted_commutator():
    space = PointSpace.uniform(3, initial_dim=2)
    rng = np.random.default_rng(11)
    chi = random_vector(space, rng)
    adapted = wiener_process(space, rng, degree=2, adapted=True)
    general = wiener_process(space, rng, degree=2)
    for x in space.ids:
        assert wiener_split_terms(adapted, x, chi)['commutator_norm'] < 1e-10
        terms = wiener_split_terms(general, x, chi)
        split = terms['adapted'] + terms['commutator'] + terms['point_mass']
        assert terms['first_order'] == pytest.approx(split, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize('degree', [0, 1, 2])
def test_wiener_suite_passes(degree):
    report = wiener_suite(PointSpace.uniform(3, initial_dim=1), degree, seed=degree)
    assert report.passed, report.residuals


def test_wiener_suite_needs_scalar_points():
    with pytest.raises(PreconditionError):
        wiener_suite(MULTI, 1)
