"""CLI commands for running the verification suites."""

import click
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'src'))

from src.core.orchestrator import orchestrator
from src.core.report_writer import FORMATS, emit
from src.core.suites import DESCRIPTIONS, SUITE_NAMES, DEFAULT_TOLERANCES
from src.models.database import db
from src.utils.config import load_harness_config
from src.utils.errors import ConfigError, PreconditionError, ReportWriteError


@click.command()
@click.option('--config', 'config_path', type=click.Path(dir_okay=False),
              help='Harness config file (JSON); defaults apply when omitted')
@click.option('--suite', 'suites', multiple=True, type=click.Choice(list(SUITE_NAMES)),
              help='Run only this suite (repeatable)')
@click.option('--seed-count', type=click.IntRange(min=1), help='Override the number of seeds')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), help='Write the report to this file')
@click.option('--format', 'output_format', default='json', type=click.Choice(list(FORMATS)),
              help='Report format')
@click.option('--store', is_flag=True, help='Save the run in the run database')
def verify(config_path, suites, seed_count, out_path, output_format, store):
    """Run the verification suites and report residuals per seed."""
    try:
        harness = load_harness_config(config_path).with_overrides(list(suites), seed_count, out_path)
    except ConfigError as e:
        click.echo(click.style(f"✗ Invalid config - {e.field}: {e.reason}", fg='red'), err=True)
        sys.exit(1)

    click.echo(f"Running {len(harness.suites)} suites on {harness.seed_count} seeds "
               f"(n={harness.n_points}, initial_dim={harness.initial_dim})", err=True)
    try:
        report = orchestrator.run(harness)
    except PreconditionError as e:
        click.echo(click.style(f"✗ {e}", fg='red'), err=True)
        sys.exit(1)

    try:
        text = emit(report, output_format, harness.output)
    except ReportWriteError as e:
        click.echo(click.style(f"✗ {e}", fg='red'), err=True)
        sys.exit(1)
    if harness.output is None:
        click.echo(text, nl=False)
    else:
        click.echo(f"Report written to {harness.output}", err=True)

    if store:
        run = db.save_run(report)
        click.echo(f"Stored as run {run.id}", err=True)

    if report.passed:
        click.echo(click.style(f"✓ All {len(report.records)} records passed "
                               f"({report.total_runtime_seconds:.1f}s)", fg='green'), err=True)
    else:
        click.echo(click.style(f"✗ {len(report.failed_records)} of {len(report.records)} records failed",
                               fg='red'), err=True)
        sys.exit(1)


@click.command()
def suites():
    """List the available verification suites."""
    click.echo(f"\nVerification Suites ({len(SUITE_NAMES)}):")
    click.echo("-" * 100)
    click.echo(f"{'Suite':<24} {'Tolerance':<12} {'Checks':<60}")
    click.echo("-" * 100)
    for name in SUITE_NAMES:
        click.echo(f"{name:<24} {DEFAULT_TOLERANCES[name]:<12.0e} {DESCRIPTIONS[name]:<60}")
