"""Normalized intensity maps with detector outlines."""

from typing import Optional, Sequence, Tuple

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Rectangle

from .plot_config import PlotConfig
from ..detection.layout import DetectorLayout
from ..exceptions import ShapeError


def normalize_intensity(intensity: np.ndarray) -> np.ndarray:
    """Scale to a maximum of 1 (all-zero maps stay zero)."""
    intensity = np.asarray(intensity, dtype=np.float64)
    peak = intensity.max() if intensity.size else 0.0
    return intensity / peak if peak > 0 else np.zeros_like(intensity)


def plane_extent(grid_size: int, pitch: float) -> Tuple[float, float, float, float]:
    """(left, right, bottom, top) of the plane, matching the sample coordinates."""
    half = grid_size * pitch / 2.0
    return (-half, half, -half, half)


class IntensityPlotter:
    """Draws output-plane intensity maps and input objects."""

    def __init__(self, plot_config: Optional[PlotConfig] = None):
        self.config = plot_config or PlotConfig()

    def _image_axes(self, title: str):
        size = self.config.figure_size
        fig, ax = plt.subplots(figsize=(size, size))
        ax.set_title(title)
        ax.set_xlabel('x [λ]')
        ax.set_ylabel('y [λ]')
        return fig, ax

    def create_intensity_map(self, intensity: np.ndarray, pitch: float,
                             layout: Optional[DetectorLayout] = None,
                             title: str = 'Output plane') -> plt.Figure:
        """
        Plot an intensity map normalized to max 1 with the layout's detectors outlined.

        Args:
            intensity: (N, N) intensity
            pitch: Sample spacing
            layout: Detectors to outline (optional)
            title: Axes title

        Returns:
            Matplotlib figure
        """
        if intensity.ndim != 2:
            raise ShapeError(f"intensity maps take an (N, N) array, got shape {intensity.shape}")
        grid_size = intensity.shape[-1]
        fig, ax = self._image_axes(title)
        image = ax.imshow(normalize_intensity(intensity), cmap=self.config.intensity_cmap,
                          vmin=0.0, vmax=1.0, origin='upper',
                          extent=plane_extent(grid_size, pitch))
        fig.colorbar(image, ax=ax, fraction=0.046, pad=0.04, label='normalized intensity')
        if layout is not None:
            self.draw_detectors(ax, layout)
        return fig

    def draw_detectors(self, ax: plt.Axes, layout: DetectorLayout) -> None:
        """Outline every detector region of a layout on existing axes."""
        for region in layout.regions:
            x_min, _, y_min, _ = region.bounds()
            ax.add_patch(Rectangle((x_min, y_min), region.width, region.width, fill=False,
                                   edgecolor=self.config.get_color(region.sign),
                                   linewidth=self.config.detector_linewidth))
            if self.config.show_class_labels:
                label = {'positive': '+', 'negative': '−'}.get(region.sign, '')
                ax.text(region.center[0], region.center[1], f"{region.class_id}{label}",
                        color=self.config.get_color(region.sign), fontsize=7,
                        ha='center', va='center')

    def create_input_image(self, values: np.ndarray, pitch: float,
                           title: str = 'Input object', phase: bool = False) -> plt.Figure:
        """Amplitude (or phase, for phase objects) of an input field."""
        values = np.asarray(values)
        grid_size = values.shape[-1]
        fig, ax = self._image_axes(title)
        data = np.angle(values) if phase else np.abs(values)
        image = ax.imshow(data, cmap=self.config.input_cmap, origin='upper',
                          extent=plane_extent(grid_size, pitch))
        fig.colorbar(image, ax=ax, fraction=0.046, pad=0.04,
                     label='phase [rad]' if phase else 'amplitude')
        return fig

    def create_plane_grid(self, intensities: Sequence[np.ndarray], pitch: float,
                          layouts: Sequence[DetectorLayout],
                          titles: Optional[Sequence[str]] = None) -> plt.Figure:
        """Side-by-side maps of several output planes, each normalized on its own."""
        count = len(intensities)
        size = self.config.figure_size
        fig, axes = plt.subplots(1, count, figsize=(size * count, size), squeeze=False)
        for index, (ax, intensity, layout) in enumerate(zip(axes[0], intensities, layouts)):
            ax.imshow(normalize_intensity(intensity), cmap=self.config.intensity_cmap,
                      vmin=0.0, vmax=1.0, origin='upper',
                      extent=plane_extent(intensity.shape[-1], pitch))
            self.draw_detectors(ax, layout)
            ax.set_title(titles[index] if titles else f"Plane {layout.plane_id}")
        fig.tight_layout()
        return fig
