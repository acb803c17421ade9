import pytest

from src.core import suites
from src.core.orchestrator import VerificationOrchestrator
from src.utils.config import HarnessConfig
from src.utils.errors import PreconditionError


@pytest.fixture
def harness():
    return HarnessConfig(n_points=2, initial_dim=1, seed_count=2,
                         suites=['fubini', 'epsilon_adjoint', 'strong_ito'])


@pytest.fixture
def orchestrator():
    return VerificationOrchestrator(max_workers=2)


def test_records_come_in_suite_then_seed_order(orchestrator, harness):
    report = orchestrator.run(harness, progress=False)
    assert [(r.suite, r.seed) for r in report.records] == [
        ('fubini', 0), ('fubini', 1), ('epsilon_adjoint', 0), ('epsilon_adjoint', 1),
        ('strong_ito', 0), ('strong_ito', 1)]
    assert report.passed
    assert report.config == harness.to_dict()


def test_runs_are_reproducible(harness):
    first = VerificationOrchestrator(max_workers=1).run(harness, progress=False)
    second = VerificationOrchestrator(max_workers=3).run(harness, progress=False)
    assert first.to_dict(include_runtime=False) == second.to_dict(include_runtime=False)


def test_seed_records_do_not_depend_on_other_seeds(orchestrator, harness):
    wide = orchestrator.run(harness.with_overrides(seed_count=4), progress=False)
    narrow = orchestrator.run(harness, progress=False)
    wide_records = {(r.suite, r.seed): r.residuals for r in wide.records}
    for record in narrow.records:
        assert wide_records[(record.suite, record.seed)] == record.residuals


def test_errors_become_failed_records(monkeypatch, orchestrator, harness):
    def broken(ctx, seed, rng):
        raise RuntimeError('boom')

    monkeypatch.setitem(suites.SUITES, 'fubini', broken)
    report = orchestrator.run(harness, progress=False)
    failed = report.failed_records
    assert [r.suite for r in failed] == ['fubini', 'fubini']
    assert failed[0].error == 'RuntimeError: boom'
    assert not report.passed
    assert all(r.passed for r in report.records if r.suite != 'fubini')
    assert orchestrator.stats['errors'] == 2


def test_stats_and_status(orchestrator, harness):
    orchestrator.run(harness, progress=False)
    status = orchestrator.get_status()
    assert status['processing_stats']['runs'] == 1
    assert status['processing_stats']['records'] == 6
    assert status['processing_stats']['last_run'] is not None
    assert 'wiener' in status['suites']


def test_empty_point_space_runs_every_suite(orchestrator):
    report = orchestrator.run(HarnessConfig(n_points=0, seed_count=1), progress=False)
    assert len(report.records) == len(suites.SUITE_NAMES)
    assert report.passed


def test_default_tolerance_reaches_ito_suites(monkeypatch, orchestrator, harness):
    from src.utils.config import config
    monkeypatch.setattr(config, 'default_tolerance', 1e-6)
    report = orchestrator.run(harness, progress=False)
    tolerances = {r.suite: r.tolerance for r in report.records}
    assert tolerances['strong_ito'] == 1e-6
    assert tolerances['fubini'] == 1e-12


def test_build_context_rejects_bad_space(orchestrator, monkeypatch, harness):
    def bad_space():
        raise PreconditionError('times must increase')

    monkeypatch.setattr(harness, 'build_space', bad_space)
    with pytest.raises(PreconditionError):
        orchestrator.build_context(harness)
