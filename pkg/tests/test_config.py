import json

import pytest

from src.utils.config import SUITE_CHOICES, HarnessConfig, load_harness_config
from src.utils.errors import ConfigError


def _write(tmp_path, data):
    path = tmp_path / 'harness.json'
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return path


def test_defaults():
    harness = load_harness_config()
    assert harness.n_points == 4
    assert harness.seed_count == 100
    assert harness.suites == list(SUITE_CHOICES)
    assert harness.q_kind == 'projector'


def test_full_file(tmp_path):
    path = _write(tmp_path, {
        'n_points': 3, 'horizon': 2.0, 'times': [0.0, 0.5, 1.5], 'weights': [0.5, 1.0, 0.5],
        'multiplicities': [1, 2, 1], 'initial_dim': 1, 'seeds': {'count': 7, 'base': 42},
        'suites': ['fubini', 'wiener'], 'q_field': {'kind': 'scalar', 'value': [0.5, 1.0]},
        'tolerances': {'fubini': 1e-10}, 'output': 'out.json', 'degree': 1,
    })
    harness = load_harness_config(path)
    assert harness.seed_count == 7 and harness.seed_base == 42
    assert harness.q_value == complex(0.5, 1.0)
    assert harness.tolerances == {'fubini': 1e-10}

    space = harness.build_space()
    assert space.n == 3
    assert [p.time for p in space.points] == [0.0, 0.5, 1.5]
    assert [p.multiplicity for p in space.points] == [1, 2, 1]
    assert harness.q_spec().describe() == 'scalar((0.5+1j))'

    echoed = harness.to_dict()
    assert echoed['q_field']['value'] == [0.5, 1.0]
    assert HarnessConfig.from_dict(echoed).to_dict() == echoed


def test_scalar_weight_and_string_field():
    harness = HarnessConfig.from_dict({'n_points': 2, 'weights': 0.25, 'q_field': 'identity'})
    assert [p.weight for p in harness.build_space().points] == [0.25, 0.25]
    assert harness.q_kind == 'identity'


def test_uniform_space():
    space = HarnessConfig(n_points=4, horizon=2.0).build_space()
    assert [p.time for p in space.points] == [0.0, 0.5, 1.0, 1.5]
    assert all(p.weight == 0.5 for p in space.points)


@pytest.mark.parametrize('data, field', [
    ({'n_points': -1}, 'n_points'),
    ({'n_points': 'three'}, 'n_points'),
    ({'horizon': 0}, 'horizon'),
    ({'initial_dim': 0}, 'initial_dim'),
    ({'seeds': {'count': 0}}, 'seeds.count'),
    ({'seeds': 5}, 'seeds'),
    ({'suites': ['fubini', 'bogus']}, 'suites'),
    ({'tolerances': {'fubini': -1.0}}, 'tolerances.fubini'),
    ({'tolerances': {'bogus': 1.0}}, 'tolerances'),
    ({'q_field': {'kind': 'unitary'}}, 'q_field.kind'),
    ({'n_points': 2, 'times': [0.5, 0.5]}, 'times'),
    ({'n_points': 2, 'times': [0.0]}, 'times'),
    ({'n_points': 2, 'weights': [1.0, 0.0]}, 'weights'),
    ({'n_points': 2, 'multiplicities': [1, 0]}, 'multiplicities'),
    ({'density': 0.0}, 'density'),
    ({'colour': 'blue'}, 'colour'),
])
def test_invalid_values_name_their_field(data, field):
    with pytest.raises(ConfigError) as info:
        HarnessConfig.from_dict(data)
    assert info.value.field == field


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_harness_config(tmp_path / 'absent.json')
    assert info.value.field == 'config'
    with pytest.raises(ConfigError):
        load_harness_config(_write(tmp_path, '{not json'))
    with pytest.raises(ConfigError):
        load_harness_config(_write(tmp_path, [1, 2]))


def test_overrides():
    harness = HarnessConfig(seed_count=10)
    changed = harness.with_overrides(['wiener'], 3, 'r.csv')
    assert (changed.suites, changed.seed_count, changed.output) == (['wiener'], 3, 'r.csv')
    assert harness.seed_count == 10
    assert harness.with_overrides([], None, None) == harness
