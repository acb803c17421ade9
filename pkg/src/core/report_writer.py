"""Export run reports as JSON, CSV or a fixed-width table."""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Optional, Union

from src.models.reports import RunReport
from src.utils.errors import ReportWriteError

logger = logging.getLogger(__name__)

FORMATS = ('json', 'csv', 'table')
CSV_HEADER = ('suite', 'seed', 'residual', 'tolerance', 'pass')


def export_report(report: RunReport, fmt: str = 'json') -> str:
    """Render a report in one of FORMATS."""
    if fmt == 'json':
        return json.dumps(report.to_dict(), indent=2, sort_keys=True)

    elif fmt == 'csv':
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for record in report.records:
            writer.writerow([record.suite, record.seed, repr(record.residual), repr(record.tolerance),
                             'true' if record.passed else 'false'])
        return buffer.getvalue()

    elif fmt == 'table':
        return format_table(report)

    raise ValueError(f"unknown report format {fmt!r}")


def format_table(report: RunReport) -> str:
    lines = ["-" * 100,
             f"{'Suite':<24} {'Seeds':<8} {'Passed':<8} {'Skipped':<8} {'Max residual':<14} {'Tolerance':<12} {'Status':<8}",
             "-" * 100]
    for suite, records in report.by_suite().items():
        passed = sum(1 for r in records if r.passed)
        skipped = sum(1 for r in records if r.skipped)
        worst = max((r.residual for r in records), default=0.0)
        tolerance = records[0].tolerance if records else 0.0
        status = 'PASS' if passed == len(records) else 'FAIL'
        lines.append(f"{suite:<24} {len(records):<8} {passed:<8} {skipped:<8} {worst:<14.3e} {tolerance:<12.1e} {status:<8}")
    lines.append("-" * 100)
    lines.append(f"Records: {len(report.records)}  Failed: {len(report.failed_records)}  "
                 f"Runtime: {report.total_runtime_seconds:.2f}s  "
                 f"Result: {'PASS' if report.passed else 'FAIL'}")
    for record in report.failed_records:
        reason = record.error or ', '.join(f"{k}={v:.3e}" for k, v in record.residuals.items()
                                           if v > record.tolerance)
        lines.append(f"  ✗ {record.suite} seed {record.seed}: {reason}")
    return '\n'.join(lines) + '\n'


def emit(report: RunReport, fmt: str = 'json', path: Optional[Union[str, Path]] = None) -> str:
    """Render the report and write it to `path` when given; returns the text."""
    text = export_report(report, fmt)
    if path is None:
        return text
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
    except OSError as e:
        logger.error(f"Could not write report to {path}: {e}")
        raise ReportWriteError(f"cannot write report to {path}: {e}") from e
    logger.info(f"Report written to {path}")
    return text
