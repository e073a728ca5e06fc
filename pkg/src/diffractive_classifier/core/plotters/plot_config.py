from typing import Dict, Optional

import matplotlib.pyplot as plt
from matplotlib import colors as mcolors


class PlotConfig:
    """Configuration for plot styling of fields, detectors and scores."""

    DEFAULT_COLORS = {
        'single': '#FFFFFF',    # White
        'positive': '#E4572E',  # Red
        'negative': '#2E86AB',  # Blue
        'score': '#D3D3D3',     # Light grey
        'predicted': '#F2C14E', # Amber
    }

    def __init__(self):
        self.colors: Dict[str, str] = {}
        self.intensity_cmap: str = 'inferno'
        self.input_cmap: str = 'gray'
        self.detector_linewidth: float = 1.2
        self.show_class_labels: bool = True
        self.figure_size: float = 5.0

    def set_color(self, role: str, color: str) -> None:
        """
        Set color for a role ('single', 'positive', 'negative', 'score', 'predicted').

        Args:
            role: Role name
            color: Hex color code (e.g., '#FF0000')
        """
        try:
            mcolors.hex2color(color)
            self.colors[role] = color
        except ValueError:
            raise ValueError(f"Invalid color code: {color}")

    def get_color(self, role: str) -> str:
        """Get color for role (default if not set)."""
        return self.colors.get(role, self.DEFAULT_COLORS.get(role, '#000000'))

    def apply_base_style(self, ax: plt.Axes) -> None:
        """Remove the top/right frame of bar-chart axes."""
        ax.spines['top'].set_visible(False)
        ax.spines['right'].set_visible(False)
        ax.spines['bottom'].set_linewidth(1.3)
        ax.spines['left'].set_linewidth(1.3)

    def to_dict(self) -> Dict:
        return {
            'colors': self.colors,
            'intensity_cmap': self.intensity_cmap,
            'input_cmap': self.input_cmap,
            'detector_linewidth': self.detector_linewidth,
            'show_class_labels': self.show_class_labels,
            'figure_size': self.figure_size,
        }

    @classmethod
    def from_dict(cls, data: Optional[Dict]) -> 'PlotConfig':
        config = cls()
        data = data or {}
        for role, color in data.get('colors', {}).items():
            config.set_color(role, color)
        config.intensity_cmap = data.get('intensity_cmap', 'inferno')
        config.input_cmap = data.get('input_cmap', 'gray')
        config.detector_linewidth = data.get('detector_linewidth', 1.2)
        config.show_class_labels = data.get('show_class_labels', True)
        config.figure_size = data.get('figure_size', 5.0)
        return config
