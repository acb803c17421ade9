import csv
import json

import pytest
from click.testing import CliRunner

import main
from src.cli import verify_commands
from src.core import suites
from src.models.database import DatabaseManager


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / 'harness.json'
    path.write_text(json.dumps({'n_points': 2, 'initial_dim': 1, 'seeds': {'count': 2},
                                'suites': ['fubini', 'epsilon_adjoint']}))
    return path


@pytest.fixture
def store(tmp_path, monkeypatch):
    manager = DatabaseManager(f"sqlite:///{tmp_path / 'runs.db'}")
    monkeypatch.setattr(verify_commands, 'db', manager)
    monkeypatch.setattr(main, 'db', manager)
    return manager


def test_suites_lists_catalogue(runner):
    result = runner.invoke(main.cli, ['suites'])
    assert result.exit_code == 0
    for name in suites.SUITE_NAMES:
        assert name in result.output


def test_verify_writes_json(runner, config_file, tmp_path):
    out = tmp_path / 'report.json'
    result = runner.invoke(main.cli, ['verify', '--config', str(config_file), '--out', str(out)])
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text())
    assert data['passed'] is True
    assert data['total_records'] == 4
    assert data['config']['output'] == str(out)


def test_verify_overrides_and_csv(runner, config_file, tmp_path):
    out = tmp_path / 'report.csv'
    result = runner.invoke(main.cli, ['verify', '--config', str(config_file), '--suite', 'fubini',
                                      '--seed-count', '3', '--format', 'csv', '--out', str(out)])
    assert result.exit_code == 0, result.output
    rows = list(csv.reader(out.open()))
    assert rows[0] == ['suite', 'seed', 'residual', 'tolerance', 'pass']
    assert [(r[0], r[1], r[4]) for r in rows[1:]] == [('fubini', '0', 'true'), ('fubini', '1', 'true'),
                                                      ('fubini', '2', 'true')]


def test_verify_failure_exits_nonzero(runner, config_file, tmp_path, monkeypatch):
    def broken(ctx, seed, rng):
        raise RuntimeError('boom')

    monkeypatch.setitem(suites.SUITES, 'fubini', broken)
    out = tmp_path / 'report.json'
    result = runner.invoke(main.cli, ['verify', '--config', str(config_file), '--out', str(out)])
    assert result.exit_code == 1
    data = json.loads(out.read_text())
    assert data['failed_records'] == 2


def test_invalid_config_exits_one(runner, tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text(json.dumps({'n_points': -2}))
    result = runner.invoke(main.cli, ['verify', '--config', str(path)])
    assert result.exit_code == 1
    assert 'n_points' in result.output


def test_unknown_suite_option_is_a_usage_error(runner):
    result = runner.invoke(main.cli, ['verify', '--suite', 'bogus'])
    assert result.exit_code == 2


def test_unwritable_output_exits_one(runner, config_file, tmp_path):
    blocker = tmp_path / 'file'
    blocker.write_text('x')
    result = runner.invoke(main.cli, ['verify', '--config', str(config_file),
                                      '--out', str(blocker / 'report.json')])
    assert result.exit_code == 1


def test_store_and_history(runner, config_file, tmp_path, store):
    out = tmp_path / 'report.json'
    result = runner.invoke(main.cli, ['verify', '--config', str(config_file), '--out', str(out), '--store'])
    assert result.exit_code == 0, result.output
    assert len(store.recent_runs()) == 1

    result = runner.invoke(main.cli, ['history', '--format', 'json'])
    assert result.exit_code == 0
    runs = json.loads(result.output)
    assert runs[0]['total_records'] == 4
    assert runs[0]['config']['n_points'] == 2


def test_history_without_runs(runner, store):
    result = runner.invoke(main.cli, ['history'])
    assert result.exit_code == 0
    assert 'No stored runs' in result.output


def test_show_config(runner, config_file):
    result = runner.invoke(main.cli, ['show-config', '--config', str(config_file)])
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data['harness']['n_points'] == 2
    assert data['harness']['seeds'] == {'count': 2, 'base': 0}
    assert 'max_workers' in data['environment']
