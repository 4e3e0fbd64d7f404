"""CLI entry point."""

import dataclasses
import logging
import sys
from pathlib import Path
from typing import Callable, Optional

import click
from rich import box
from rich.table import Table

from config import console, load_settings, setup_logging
from config.settings import FEATURE_SETS, STUDIES, parse_window
from errors import USER_ERRORS, ConfigError, ConvQError, StageError
from pipeline.orchestrator import PipelineOrchestrator
from synth import ScenarioConfig, gen_mini_mingle

logger = logging.getLogger(__name__)

EXIT_USER_ERROR = 1
EXIT_INTERNAL_ERROR = 2


def _execute(action: Callable[[], object]):
    """Run a command body and map failures onto exit codes."""
    try:
        return action()
    except StageError as e:
        console.print(f"[red]Stage '{e.stage}' failed: {e.cause}[/red]")
        sys.exit(EXIT_USER_ERROR if e.is_user_error else EXIT_INTERNAL_ERROR)
    except USER_ERRORS as e:
        console.print(f"[red]Error: {e}[/red]")
        sys.exit(EXIT_USER_ERROR)
    except ConvQError as e:
        console.print(f"[red]Error: {e}[/red]")
        sys.exit(EXIT_INTERNAL_ERROR)
    except Exception as e:
        logger.exception("Unexpected error")
        console.print(f"[red]Internal error: {e}[/red]")
        sys.exit(EXIT_INTERNAL_ERROR)


def _settings(config: Optional[str], workers: Optional[int], output: Optional[str]):
    overrides = {}
    if workers is not None:
        overrides['WORKERS'] = workers
    if output is not None:
        overrides['OUTPUT_DIR'] = str(Path(output).resolve())
    settings = load_settings(config, **overrides)
    settings.validate()
    return settings


def _split(value: Optional[str], allowed, option: str):
    if value is None:
        return None
    parts = [p.strip() for p in value.split(',') if p.strip()]
    bad = [p for p in parts if p not in allowed]
    if bad or not parts:
        raise ConfigError(option, f"unknown value(s) {bad}; allowed: {list(allowed)}")
    return parts


def pipeline_options(func):
    """Options shared by every stage command."""
    func = click.option('--output', '-o', type=click.Path(file_okay=False), help='Output directory')(func)
    func = click.option('--workers', '-w', type=int, help='Parallel workers (also CONVQ_WORKERS)')(func)
    func = click.option('--config', '-c', 'config', type=click.Path(dir_okay=False),
                        help='Pipeline config file (KEY=VALUE lines)')(func)
    return func


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Debug logging')
def cli(verbose: bool):
    """Perceived conversation quality pipeline CLI."""
    setup_logging(logging.DEBUG if verbose else logging.INFO)


@cli.command()
@pipeline_options
@click.option('--study', '-s', 'studies', help='Comma-separated studies (window,fusion,aggregator)')
def run(config: str, workers: int, output: str, studies: str):
    """Run the complete pipeline."""
    def action():
        settings = _settings(config, workers, output)
        orchestrator = PipelineOrchestrator(settings)
        console.print(f"[cyan]Running complete pipeline (config {settings.config_hash()})...[/cyan]")
        orchestrator.run(_split(studies, STUDIES, '--study'))
        console.print(f"\n[green]Pipeline completed. Outputs in {settings.OUTPUT_DIR}[/green]")
    _execute(action)


@cli.command()
@pipeline_options
def ingest(config: str, workers: int, output: str):
    """Validate inputs, slice conversations and summarize the dataset."""
    def action():
        orchestrator = PipelineOrchestrator(_settings(config, workers, output))
        try:
            orchestrator.run_ingest()
        finally:
            orchestrator.write_manifest()
    _execute(action)


@cli.command()
@pipeline_options
def reliability(config: str, workers: int, output: str):
    """Inter-rater agreement, sample filtering, labels and construct validity."""
    def action():
        orchestrator = PipelineOrchestrator(_settings(config, workers, output))
        try:
            orchestrator.run_reliability()
        finally:
            orchestrator.write_manifest()
    _execute(action)


@cli.command()
@pipeline_options
@click.option('--sets', help='Comma-separated feature sets (tt,sync,caus,conv)')
@click.option('--window', help="Window length in seconds, or 'none' for raw channels")
def features(config: str, workers: int, output: str, sets: str, window: str):
    """Extract feature matrices."""
    def action():
        settings = _settings(config, workers, output)
        feature_sets = _split(sets, FEATURE_SETS, '--sets')
        orchestrator = PipelineOrchestrator(settings)
        try:
            if window is None:
                orchestrator.run_features(feature_sets=feature_sets)
            else:
                orchestrator.run_features(parse_window(window, '--window'), feature_sets=feature_sets)
        finally:
            orchestrator.write_manifest()
    _execute(action)


@cli.command()
@pipeline_options
def stats(config: str, workers: int, output: str):
    """Hypothesis tests of PCQ against cardinality, turn-taking and coordination."""
    def action():
        orchestrator = PipelineOrchestrator(_settings(config, workers, output))
        try:
            orchestrator.run_stats()
        finally:
            orchestrator.write_manifest()
    _execute(action)


@cli.command()
@pipeline_options
@click.option('--study', '-s', 'studies', help='Comma-separated studies (window,fusion,aggregator)')
def predict(config: str, workers: int, output: str, studies: str):
    """Cross-validated classification studies."""
    def action():
        orchestrator = PipelineOrchestrator(_settings(config, workers, output))
        try:
            orchestrator.run_predict(_split(studies, STUDIES, '--study'))
        finally:
            orchestrator.write_manifest()
    _execute(action)


@cli.command()
@click.option('--config', '-c', 'config', type=click.Path(dir_okay=False), help='Scenario file (KEY=VALUE lines)')
@click.option('--output', '-o', type=click.Path(file_okay=False), required=True, help='Dataset directory')
@click.option('--seed', type=int, help='Override the scenario seed')
@click.option('--groups', '-n', 'n_groups', type=int, help='Override the number of groups')
@click.option('--workers', '-w', type=int, default=1, envvar='CONVQ_WORKERS', help='Parallel workers')
def synth(config: str, output: str, seed: int, n_groups: int, workers: int):
    """Generate a synthetic mingling dataset with planted ground truth."""
    def action():
        scenario = ScenarioConfig.from_file(config) if config else ScenarioConfig()
        overrides = {k: v for k, v in (('seed', seed), ('n_groups', n_groups)) if v is not None}
        if overrides:
            scenario = dataclasses.replace(scenario, **overrides)
        scenario.validate()

        console.print(f"[cyan]Generating {scenario.n_groups} groups (seed {scenario.seed})...[/cyan]")
        dataset = gen_mini_mingle(scenario, output, workers=workers)

        table = Table(title='Synthetic Dataset', box=box.ROUNDED, show_header=True)
        table.add_column('Metric', style='cyan')
        table.add_column('Value', justify='right', style='yellow')
        table.add_row('Groups', str(len(dataset.groups)))
        table.add_row('Participants', str(len(dataset.accel)))
        table.add_row('Slices', str(len(dataset.slices)))
        table.add_row('High-quality groups', str(int(dataset.ground_truth['label'].sum())))
        table.add_row('Label rule', scenario.label_rule)
        console.print(table)
        console.print(f"\n[green]Dataset written to {output}; run it with: convq run -c {dataset.paths['config']}[/green]")
    _execute(action)


if __name__ == '__main__':
    cli()
