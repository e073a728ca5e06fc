"""Comparison tables of architectures over repeated runs."""

import io
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from openpyxl import Workbook
from openpyxl.styles import Alignment, Font, PatternFill

from .atomic import atomic_write
from ..architecture.notation import FAMILY_ORDER, parse_notation
from ..processors.statistics import StatisticsEngine

logger = logging.getLogger(__name__)

RUNS_FILE = 'runs.csv'

RUN_COLUMNS = ['architecture', 'dataset', 'seed', 'best_epoch', 'val_accuracy', 'test_accuracy']

SIGNIFICANCE_FILLS = {
    '***': 'FF6B6B',
    '**': 'FFA07A',
    '*': 'FFD700',
}


class ComparisonTableExporter:
    """Builds 'architecture | dataset | mean ± std' tables from run directories."""

    def __init__(self, stats_engine: Optional[StatisticsEngine] = None):
        """Initialize table exporter.

        Args:
            stats_engine: Statistics engine for summaries and Welch tests
        """
        self.stats = stats_engine or StatisticsEngine()

    @staticmethod
    def collect_runs(run_dirs: Sequence[Path]) -> pd.DataFrame:
        """
        Concatenate the per-repetition results of several run directories.

        Raises:
            FileNotFoundError: Listing every directory without results
        """
        frames, missing = [], []
        for run_dir in run_dirs:
            runs_path = Path(run_dir) / RUNS_FILE
            if not runs_path.is_file():
                missing.append(str(run_dir))
                continue
            frames.append(pd.read_csv(runs_path))
        if missing:
            raise FileNotFoundError(f"no completed runs in: {', '.join(missing)}")
        if not frames:
            raise FileNotFoundError("no run directories given")
        return pd.concat(frames, ignore_index=True)

    @staticmethod
    def _sort_key(architecture: str):
        spec = parse_notation(architecture)
        return (FAMILY_ORDER.index(spec.family), spec.n_networks, spec.total_neurons, architecture)

    @staticmethod
    def _is_standard(architecture: str) -> bool:
        spec = parse_notation(architecture)
        return not spec.differential and spec.n_networks == 1

    def create_comparison_table(self, runs: pd.DataFrame) -> pd.DataFrame:
        """
        One row per (dataset, architecture) with mean and sample std of the test accuracy.

        Rows are grouped by dataset, then ordered non-differential,
        differential, split differential. ``p_value`` is Welch's test against
        the standard single-network design of the same dataset.

        Args:
            runs: One row per repetition (see RUN_COLUMNS)

        Returns:
            DataFrame with the formatted ``accuracy`` column and its numbers
        """
        rows = []
        for (dataset, architecture), group in runs.groupby(['dataset', 'architecture'], sort=False):
            summary = self.stats.summarize(group['test_accuracy'])
            rows.append({
                'architecture': architecture,
                'dataset': dataset,
                'family': parse_notation(architecture).family,
                'n': summary.n,
                'mean': summary.mean,
                'std': summary.std,
                'accuracy': summary.format(),
                'p_value': np.nan,
                'significance': '',
            })

        datasets = list(dict.fromkeys(row['dataset'] for row in rows))
        by_key = {(row['dataset'], row['architecture']): row for row in rows}
        for dataset in datasets:
            standards = sorted(
                (row['architecture'] for row in rows
                 if row['dataset'] == dataset and self._is_standard(row['architecture'])),
                key=self._sort_key,
            )
            if not standards:
                continue
            comparison = self.stats.compare_to_reference(runs[runs['dataset'] == dataset],
                                                         reference=standards[0])
            for result in comparison.itertuples(index=False):
                if self._is_standard(result.architecture):
                    continue
                row = by_key[(dataset, result.architecture)]
                row['p_value'] = result.p_value
                row['significance'] = self.stats.significance_label(result.p_value)

        rows.sort(key=lambda row: (datasets.index(row['dataset']),
                                   self._sort_key(row['architecture'])))
        return pd.DataFrame(rows, columns=['architecture', 'dataset', 'family', 'n', 'mean',
                                           'std', 'accuracy', 'p_value', 'significance'])

    @staticmethod
    def format_text(table: pd.DataFrame) -> str:
        """Aligned 'architecture | dataset | mean ± std' lines."""
        if table.empty:
            return ''
        width_arch = max(len('architecture'), table['architecture'].str.len().max())
        width_data = max(len('dataset'), table['dataset'].str.len().max())
        lines = [f"{'architecture':<{width_arch}} | {'dataset':<{width_data}} | mean ± std",
                 f"{'-' * width_arch}-+-{'-' * width_data}-+-{'-' * 16}"]
        for row in table.itertuples(index=False):
            line = f"{row.architecture:<{width_arch}} | {row.dataset:<{width_data}} | {row.accuracy}"
            if isinstance(row.p_value, float) and np.isfinite(row.p_value):
                line += f"  (p={row.p_value:.3g} {row.significance})"
            lines.append(line)
        return '\n'.join(lines) + '\n'

    @staticmethod
    def export_csv(table: pd.DataFrame, output_path: Path) -> Path:
        return atomic_write(output_path, table.to_csv(index=False))

    def export_to_excel(self, tables: Dict[str, pd.DataFrame], output_path: Path) -> Path:
        """Export tables to a formatted Excel file, one sheet per table.

        Args:
            tables: Dictionary of sheet name to DataFrame
            output_path: Path for output Excel file
        """
        wb = Workbook()
        wb.remove(wb.active)

        for table_name, df in tables.items():
            ws = wb.create_sheet(table_name.capitalize()[:31])

            for col_idx, col_name in enumerate(df.columns, 1):
                cell = ws.cell(row=1, column=col_idx, value=col_name)
                cell.font = Font(bold=True, size=12, color='FFFFFF')
                cell.fill = PatternFill(start_color='366092', end_color='366092', fill_type='solid')
                cell.alignment = Alignment(horizontal='center', vertical='center')

            significance_col = (list(df.columns).index('significance') + 1
                                if 'significance' in df.columns else None)
            for row_idx, row in enumerate(df.itertuples(index=False), 2):
                for col_idx, value in enumerate(row, 1):
                    if isinstance(value, float) and not np.isfinite(value):
                        value = None
                    elif isinstance(value, np.generic):
                        value = value.item()
                    cell = ws.cell(row=row_idx, column=col_idx, value=value)
                    cell.alignment = Alignment(horizontal='center', vertical='center')
                    if col_idx == significance_col and value in SIGNIFICANCE_FILLS:
                        color = SIGNIFICANCE_FILLS[value]
                        cell.fill = PatternFill(start_color=color, end_color=color,
                                                fill_type='solid')

            for col in ws.columns:
                longest = max(len(str(cell.value)) if cell.value is not None else 0 for cell in col)
                ws.column_dimensions[col[0].column_letter].width = min(longest + 2, 50)

        buffer = io.BytesIO()
        wb.save(buffer)
        return atomic_write(output_path, buffer.getvalue())

    def export_all(self, table: pd.DataFrame, output_dir: Path, base_name: str = 'comparison',
                   excel: bool = False) -> List[Path]:
        """Write the text table, its CSV companion and optionally a spreadsheet."""
        output_dir = Path(output_dir)
        written = [
            atomic_write(output_dir / f"{base_name}.txt", self.format_text(table)),
            self.export_csv(table, output_dir / f"{base_name}.csv"),
        ]
        if excel:
            written.append(self.export_to_excel({'comparison': table},
                                                output_dir / f"{base_name}.xlsx"))
        logger.info("Wrote comparison table with %d rows to %s", len(table), output_dir)
        return written
