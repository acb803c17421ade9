import csv
import io
import json

import pytest

from src.core.report_writer import CSV_HEADER, emit, export_report
from src.models.reports import ItoReport, RunReport, within_tolerance
from src.utils.errors import ReportWriteError


@pytest.fixture
def report():
    records = [
        ItoReport.from_residuals('fubini', 0, {'fubini': 1e-15}, 1e-12),
        ItoReport.from_residuals('fubini', 1, {'fubini': 3e-9}, 1e-12),
        ItoReport.skip('wiener', 0, 1e-9, 'the Wiener case needs d(x) = 1 at every point'),
        ItoReport.failure('norms', 0, 1e-12, 'ValueError: bad'),
    ]
    return RunReport({'n_points': 2}, records, 0.5)


def test_within_tolerance_is_relative_above_unit_scale():
    assert within_tolerance(1e-10, 1e-9)
    assert not within_tolerance(1e-8, 1e-9)
    assert within_tolerance(1e-8, 1e-9, scale=100.0)
    assert within_tolerance(0.0, 0.0)


def test_report_summary(report):
    assert not report.passed
    assert [(r.suite, r.seed) for r in report.failed_records] == [('fubini', 1), ('norms', 0)]
    assert list(report.by_suite()) == ['fubini', 'wiener', 'norms']
    assert report.records[2].passed and report.records[2].skipped


def test_json(report):
    data = json.loads(export_report(report, 'json'))
    assert data['passed'] is False
    assert data['total_records'] == 4
    assert data['failed_records'] == 2
    assert data['records'][3]['error'] == 'ValueError: bad'
    assert 'runtime_seconds' in data['records'][0]


def test_json_without_runtime_is_stable(report):
    data = report.to_dict(include_runtime=False)
    assert 'total_runtime_seconds' not in data
    assert all('runtime_seconds' not in r for r in data['records'])


def test_csv(report):
    rows = list(csv.reader(io.StringIO(export_report(report, 'csv'))))
    assert tuple(rows[0]) == CSV_HEADER
    assert rows[1] == ['fubini', '0', '1e-15', '1e-12', 'true']
    assert rows[2][4] == 'false'
    assert float(rows[2][2]) == 3e-9
    assert len(rows) == 5


def test_csv_of_empty_report():
    assert export_report(RunReport({}), 'csv') == ','.join(CSV_HEADER) + '\n'


def test_table(report):
    text = export_report(report, 'table')
    assert 'fubini' in text and 'FAIL' in text
    assert 'norms seed 0: ValueError: bad' in text
    assert 'Records: 4  Failed: 2' in text


def test_unknown_format(report):
    with pytest.raises(ValueError):
        export_report(report, 'xml')


def test_emit_writes_file(report, tmp_path):
    path = tmp_path / 'nested' / 'report.json'
    text = emit(report, 'json', path)
    assert path.read_text(encoding='utf-8') == text


def test_emit_unwritable_path(report, tmp_path):
    blocker = tmp_path / 'file'
    blocker.write_text('x')
    with pytest.raises(ReportWriteError):
        emit(report, 'csv', blocker / 'report.csv')
