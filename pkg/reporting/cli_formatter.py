"""CLI output formatter with tables and readable reports."""

import math
from typing import Dict, Iterable, List, Optional

import pandas as pd
from rich import box
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from config import console as shared_console


def _fmt(value, digits: int = 3) -> str:
    if value is None:
        return 'n/a'
    if isinstance(value, float):
        if math.isnan(value):
            return 'n/a'
        return f"{value:.{digits}f}"
    return str(value)


class CLIFormatter:
    """Formats stage summaries for CLI display."""

    def __init__(self, console=None):
        """Initialize CLI formatter."""
        self.console = console or shared_console

    def _header(self, title: str, subtitle: Optional[str] = None, style: str = 'cyan'):
        text = Text(title, style=f"bold {style}")
        if subtitle:
            text.append(f" - {subtitle}", style='dim')
        self.console.print(Panel(text, border_style=style, expand=False))

    def display_dataset_summary(self, summary: Dict, orphans: Optional[Dict[str, List[str]]] = None):
        """Display group and slice statistics of the ingest stage.

        Args:
            summary: Output of ``dataset_summary``
            orphans: Output of ``cross_validate``
        """
        self._header('Dataset Summary')
        table = Table(title='Groups and Slices', box=box.ROUNDED, show_header=True)
        table.add_column('Metric', style='cyan')
        table.add_column('Value', justify='right', style='yellow')
        for key in ('n_groups', 'n_groups_kept', 'n_groups_dropped', 'n_slices'):
            table.add_row(key.replace('_', ' '), _fmt(summary.get(key)))
        for key in ('duration_mean_min', 'duration_std_min', 'duration_median_min', 'duration_mode_min'):
            table.add_row(key.replace('_min', ' (min)').replace('_', ' '), _fmt(summary.get(key), 2))
        self.console.print(table)

        counts = summary.get('cardinality_counts', {})
        if counts:
            card = Table(title='Slices per Cardinality', box=box.ROUNDED, show_header=True)
            card.add_column('Cardinality', style='cyan', justify='right')
            card.add_column('Slices', style='yellow', justify='right')
            for size, count in sorted(counts.items()):
                card.add_row(str(size), str(count))
            self.console.print(card)

        problems = {k: v for k, v in (orphans or {}).items() if v}
        if problems:
            text = Text('Orphan ids:\n', style='bold')
            for category, ids in problems.items():
                shown = ', '.join(ids[:10]) + (' ...' if len(ids) > 10 else '')
                text.append(f"  • {category.replace('_', ' ')}: {shown}\n", style='red')
            self.console.print(Panel(text, border_style='red', expand=False))
        self.console.print()

    def display_reliability(self, reports: Iterable):
        """Display kappa statistics and label balance per annotation level."""
        self._header('Annotation Reliability')
        table = Table(title='Inter-rater Agreement', box=box.ROUNDED, show_header=True)
        table.add_column('Level', style='cyan')
        table.add_column('Samples', justify='right')
        table.add_column('Kept', justify='right', style='green')
        table.add_column('Mean κ', justify='right', style='yellow')
        table.add_column('Median κ', justify='right', style='yellow')
        table.add_column('High / Low', justify='center')
        for report in reports:
            summary = report.kappa_summary()
            labels = report.labels()
            table.add_row(
                report.level,
                str(summary['n_samples']),
                str(summary['n_kept']),
                _fmt(summary['kappa_mean']),
                _fmt(summary['kappa_median']),
                f"{int(labels.sum())} / {int((labels == 0).sum())}",
            )
        self.console.print(table)
        self.console.print()

    def display_validity(self, level: str, report):
        """Display the eigenvalue table of the questionnaire PCA."""
        table = Table(title=f"Construct Validity ({level})", box=box.ROUNDED, show_header=True)
        table.add_column('Component', justify='right', style='cyan')
        table.add_column('Eigenvalue', justify='right', style='yellow')
        table.add_column('Cumulative', justify='right')
        for row in report.eigen_table().itertuples(index=False):
            style = 'bold' if row.eigenvalue >= 1.0 else None
            table.add_row(f"PC{row.component}", _fmt(row.eigenvalue), f"{row.cumulative_ratio:.1%}", style=style)
        self.console.print(table)
        self.console.print()

    def display_features(self, tables, label: str = 'none'):
        """Display the size of extracted feature matrices."""
        table = Table(title=f"Features (window {label})", box=box.ROUNDED, show_header=True)
        table.add_column('Scope', style='cyan')
        table.add_column('Rows', justify='right')
        table.add_column('Features', justify='right', style='yellow')
        table.add_column('Missing', justify='right', style='red')
        for scope, frame in (('group', tables.group), ('individual', tables.individual)):
            columns = [c for c in frame.columns if '__' in c]
            missing = float(frame[columns].isna().to_numpy().mean()) if columns and len(frame) else 0.0
            table.add_row(scope, str(len(frame)), str(len(columns)), f"{missing:.1%}")
        self.console.print(table)
        self.console.print()

    def display_hypothesis_grid(self, grid: pd.DataFrame, significance: float = 0.005):
        """Display the hypothesis-test grid; significant rows are highlighted."""
        self._header('Hypothesis Tests', f"adjusted p < {significance:g}")
        if grid.empty:
            self.console.print('[red]No hypothesis tests could be run.[/red]')
            return
        table = Table(box=box.ROUNDED, show_header=True)
        table.add_column('Dependent', style='cyan')
        table.add_column('Set', style='cyan')
        table.add_column('Model')
        table.add_column('Predictor', style='dim', overflow='fold')
        table.add_column('β', justify='right', style='yellow')
        table.add_column('p', justify='right')
        table.add_column('adj. p', justify='right')
        shown = grid[grid['model'] != 'LASSO'] if (grid['model'] != 'LASSO').any() else grid
        for row in shown.itertuples(index=False):
            table.add_row(
                row.dependent, row.predictor_set, row.model, row.predictor,
                _fmt(float(row.beta), 4), _fmt(float(row.p), 4), _fmt(float(row.adjusted_p), 4),
                style='bold green' if row.significant else None,
            )
        self.console.print(table)
        self.console.print()

    def display_study(self, experiment):
        """Display the AUC ranking of one study."""
        self._header(f"{experiment.name.title()} Study", experiment.dependent)
        ranking = experiment.ranking()
        table = Table(box=box.ROUNDED, show_header=True)
        table.add_column('Rank', justify='right')
        table.add_column('Condition', style='cyan')
        table.add_column('AUC', justify='right', style='yellow')
        table.add_column('± std', justify='right', style='dim')
        table.add_column('Features', justify='right')
        for row in ranking.itertuples(index=False):
            table.add_row(str(row.rank), row.condition, _fmt(row.auc_mean), _fmt(row.auc_std), str(row.n_features))
        self.console.print(table)
        for condition, reason in experiment.failed.items():
            self.console.print(f"[red]  {condition}: {reason}[/red]")
        self.console.print()

    def display_manifest(self, manifest: Dict):
        """Display completed and failed stages of a run."""
        failed = manifest.get('failed', {})
        style = 'red' if failed else 'green'
        text = Text(f"config {manifest.get('config_hash')}  seed {manifest.get('seed')}\n", style='dim')
        for stage in manifest.get('stages', []):
            text.append(f"  ✓ {stage}\n", style='green')
        for stage, reason in failed.items():
            text.append(f"  ✗ {stage}: {reason}\n", style='red')
        text.append(f"{len(manifest.get('outputs', []))} output files", style='bold')
        self.console.print(Panel(text, title='Run Summary', border_style=style, expand=False))
