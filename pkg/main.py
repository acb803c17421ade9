#!/usr/bin/env python3
"""
fockcalc - Main CLI Interface

Numerical verification harness for the discrete quantum stochastic kernel calculus:
kernels over finite point spaces, their Fock representation and the Itô formulae.
"""

import click
import json
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / 'src'))

from src.utils.logging_config import setup_logging
from src.cli.verify_commands import suites, verify
from src.models.database import db
from src.utils.config import config, load_harness_config
from src.utils.errors import ConfigError

# Setup logging
logger = setup_logging()

@click.group()
@click.version_option(version='1.0.0')
def cli():
    """fockcalc - Verify the kernel calculus and Itô formulae on finite point spaces."""
    pass

cli.add_command(verify)
cli.add_command(suites)

@cli.command()
@click.option('--limit', '-l', default=10, help='Maximum number of runs')
@click.option('--format', 'output_format', default='table', type=click.Choice(['table', 'json']),
              help='Output format')
def history(limit, output_format):
    """List recently stored verification runs."""
    runs = db.recent_runs(limit)

    if not runs:
        click.echo("No stored runs. Use 'verify --store' to keep a run.")
        return

    if output_format == 'json':
        run_data = []
        for run in runs:
            run_data.append({
                'id': run.id,
                'started_at': run.started_at.isoformat() if run.started_at else None,
                'passed': run.passed,
                'total_records': run.total_records,
                'failed_records': run.failed_records,
                'runtime_seconds': run.runtime_seconds,
                'config': json.loads(run.config_json)
            })
        click.echo(json.dumps(run_data, indent=2))
    else:
        click.echo(f"\nRecent Runs ({len(runs)}):")
        click.echo("-" * 80)
        click.echo(f"{'Run':<6} {'Started':<20} {'Records':<10} {'Failed':<8} {'Runtime':<10} {'Status':<8}")
        click.echo("-" * 80)
        for run in runs:
            started = run.started_at.strftime('%Y-%m-%d %H:%M:%S') if run.started_at else ''
            status = click.style('PASS' if run.passed else 'FAIL', fg='green' if run.passed else 'red')
            click.echo(f"{run.id:<6} {started:<20} {run.total_records:<10} {run.failed_records:<8} "
                       f"{(run.runtime_seconds or 0):<10.1f} {status}")

@cli.command('show-config')
@click.option('--config', 'config_path', type=click.Path(dir_okay=False),
              help='Harness config file (JSON); defaults apply when omitted')
def show_config(config_path):
    """Show the environment settings and the resolved harness config."""
    try:
        harness = load_harness_config(config_path)
    except ConfigError as e:
        click.echo(click.style(f"✗ Invalid config - {e.field}: {e.reason}", fg='red'), err=True)
        sys.exit(1)

    click.echo(json.dumps({'environment': config.to_dict(), 'harness': harness.to_dict()},
                          indent=2, sort_keys=True))

if __name__ == '__main__':
    cli()
