import math

import pytest

from src.core.chainspace import (AtomicTable, Point, PointSpace, Table, chain_weight, enumerate_chains,
                                 enumerate_table_keys, enumerate_tables, fubini_residual,
                                 measure_sum, next_time, restrict, subsets)
from src.core.ensembles import random_chain_function
from src.utils.errors import PreconditionError


def test_uniform_space_layout():
    space = PointSpace.uniform(4, horizon=2.0)
    assert space.ids == (1, 2, 3, 4)
    assert [p.time for p in space.points] == [0.0, 0.5, 1.0, 1.5]
    assert all(p.weight == 0.5 for p in space.points)


def test_chains_ordered_by_size_then_lexicographic(space):
    chains = enumerate_chains(space)
    assert len(chains) == 8
    assert chains[:4] == [(), (1,), (2,), (3,)]
    assert chains[-1] == (1, 2, 3)
    assert list(subsets((1, 3))) == [(), (1,), (3,), (1, 3)]


def test_tables_count_and_key_round_trip(space):
    assert len(enumerate_table_keys(space)) == 5 ** 3
    tables = enumerate_tables(space)
    assert len(set(tables)) == 125
    table = Table(scalar=(2,), annihilation=(), creation=(3,), number=(1,))
    assert table.key(space) == 'nsc'
    assert Table.from_key(space, 'nsc') == table
    assert table.output_chain == (1, 3)
    assert table.input_chain == (1,)


def test_table_chains_must_be_disjoint():
    with pytest.raises(PreconditionError):
        Table(scalar=(1,), creation=(1,))


def test_atomic_tables_place_one_point(space):
    for role in 'sacn':
        atom = AtomicTable(role, 2)
        assert atom.table().key(space) == '.' + role + '.'
        assert Table.from_key(space, '.' + role + '.') == atom.table()
    assert AtomicTable('n', 1).table().input_chain == (1,)
    assert AtomicTable('a', 3).table().output_chain == ()
    with pytest.raises(PreconditionError):
        AtomicTable('x', 1)


def test_empty_space_has_one_chain_and_one_table(empty_space):
    assert enumerate_chains(empty_space) == [()]
    assert enumerate_table_keys(empty_space) == ['']
    assert empty_space.fock_dim() == 2
    assert empty_space.cut_times() == [0.0, math.inf]


def test_levels_and_cuts(space):
    assert space.level(0.0) == 0
    assert space.level(0.2) == 1
    assert space.level(math.inf) == 3
    assert space.level_time(0) == 0.0
    assert space.level_time(3) == math.inf
    assert space.cut_times() == [0.0, space.time(2), space.time(3), math.inf]
    with pytest.raises(PreconditionError):
        space.level_time(4)


def test_restrict_partitions_chain(space):
    chain = (1, 2, 3)
    for t in (0.0, 0.3, 0.5, 2.0):
        before = restrict(space, chain, t, 'before')
        after = restrict(space, chain, t, 'from')
        assert tuple(sorted(before + after)) == chain


def test_next_time(space):
    assert next_time(space, 1, (1, 2, 3)) == space.time(2)
    assert next_time(space, 3, (1, 2, 3)) == math.inf
    assert next_time(space, 1) == math.inf


def test_weights_and_measure(space_multi):
    assert chain_weight(space_multi, ()) == 1.0
    assert chain_weight(space_multi, (1, 2)) == pytest.approx(0.28)
    # Σ_ϑ w(ϑ) = ∏ (1 + Δ(x))
    assert measure_sum(space_multi, lambda chain: 1.0) == pytest.approx(1.4 * 1.7)


def test_invalid_spaces():
    with pytest.raises(PreconditionError):
        PointSpace((Point(1, 0.5, 1.0), Point(2, 0.5, 1.0)))
    with pytest.raises(PreconditionError):
        PointSpace((Point(1, 0.0, 0.0),))
    with pytest.raises(PreconditionError):
        PointSpace.uniform(-1)
    with pytest.raises(PreconditionError):
        PointSpace.uniform(2, initial_dim=0)


def test_fubini_on_random_functions(space, rng):
    values = random_chain_function(space, rng)
    assert fubini_residual(space, lambda u, k: values[(u, k)]) < 1e-12


def test_fubini_trivial_on_empty_space(empty_space):
    assert fubini_residual(empty_space, lambda u, k: 3.0) == 0.0


def test_without_keeps_ids(space):
    reduced = space.without(2)
    assert reduced.ids == (1, 3)
    assert reduced.time(3) == space.time(3)
    with pytest.raises(PreconditionError):
        space.without(7)
