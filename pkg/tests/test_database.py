from datetime import datetime, timedelta

import pytest

from src.models.database import DatabaseManager
from src.models.reports import ItoReport, RunReport


@pytest.fixture
def manager(tmp_path):
    return DatabaseManager(f"sqlite:///{tmp_path / 'runs.db'}")


def _report(passed=True):
    records = [ItoReport.from_residuals('fubini', 0, {'fubini': 0.0}, 1e-12, parameters={'n': 2}),
               ItoReport.from_residuals('norms', 0, {'submultiplicative': 0.0 if passed else 1.0}, 1e-12)]
    return RunReport({'n_points': 2, 'suites': ['fubini', 'norms']}, records, 1.25)


def test_save_and_load(manager):
    run = manager.save_run(_report())
    assert run.id is not None
    assert run.passed and run.total_records == 2 and run.failed_records == 0

    stored = manager.get_run(run.id)
    assert stored.runtime_seconds == 1.25
    records = manager.get_records(run.id)
    assert [r.suite for r in records] == ['fubini', 'norms']
    assert '"n": 2' in records[0].parameters_json


def test_failed_records_only(manager):
    run = manager.save_run(_report(passed=False))
    failed = manager.get_records(run.id, failed_only=True)
    assert [r.suite for r in failed] == ['norms']
    assert not manager.get_run(run.id).passed


def test_recent_runs_newest_first(manager):
    now = datetime.utcnow()
    older = manager.save_run(_report(), started_at=now - timedelta(hours=1))
    newer = manager.save_run(_report(), started_at=now)
    assert [r.id for r in manager.recent_runs()] == [newer.id, older.id]
    assert len(manager.recent_runs(limit=1)) == 1
    assert manager.get_run(9999) is None
