"""Figures of output-plane intensities, detector signals and class scores."""

from .plot_config import PlotConfig
from .intensity_plotter import IntensityPlotter, normalize_intensity, plane_extent
from .score_plotter import ScorePlotter
from .plot_exporter import PlotExporter

__all__ = [
    'PlotConfig',
    'IntensityPlotter',
    'normalize_intensity',
    'plane_extent',
    'ScorePlotter',
    'PlotExporter',
]
