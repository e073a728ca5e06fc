import io
from pathlib import Path
from typing import Dict, List, Sequence

import matplotlib.pyplot as plt

from ..exporters.atomic import atomic_write


class PlotExporter:
    """Exports figures to image files without leaving partial files behind."""

    DEFAULT_DPI = 200
    SUPPORTED_FORMATS = ['png', 'tif', 'tiff', 'pdf', 'svg']

    def __init__(self, output_dir: Path, dpi: int = DEFAULT_DPI):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.dpi = dpi

    def export_figure(self, fig: plt.Figure, base_name: str,
                      formats: Sequence[str] = ('png',), close: bool = True) -> List[Path]:
        """
        Export a figure in several formats.

        Args:
            fig: Matplotlib figure to export
            base_name: Base filename (without extension)
            formats: Formats from SUPPORTED_FORMATS
            close: Close the figure afterwards

        Returns:
            List of paths to exported files
        """
        exported_files = []
        for fmt in formats:
            if fmt not in self.SUPPORTED_FORMATS:
                raise ValueError(f"Unsupported format: {fmt}")
            if fmt == 'tiff':
                fmt = 'tif'

            buffer = io.BytesIO()
            fig.savefig(buffer, dpi=self.dpi, format=fmt, bbox_inches='tight',
                        facecolor='white', edgecolor='none', transparent=False)
            exported_files.append(atomic_write(self.output_dir / f"{base_name}.{fmt}",
                                               buffer.getvalue()))
        if close:
            plt.close(fig)
        return exported_files

    def export_multiple_figures(self, figures: Dict[str, plt.Figure],
                                formats: Sequence[str] = ('png',)) -> Dict[str, List[Path]]:
        """Export several figures, keyed by base name."""
        return {name: self.export_figure(fig, name, formats) for name, fig in figures.items()}
