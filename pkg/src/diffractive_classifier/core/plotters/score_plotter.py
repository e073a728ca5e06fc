"""Bar charts of detector signals and class scores."""

from typing import Optional

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from .plot_config import PlotConfig


class ScorePlotter:
    """Creates bar charts of one sample's detector signals and class scores."""

    def __init__(self, plot_config: Optional[PlotConfig] = None):
        self.config = plot_config or PlotConfig()

    def _axes(self, num_classes: int):
        width = max(4.0, 0.6 * num_classes + 2.0)
        fig, ax = plt.subplots(figsize=(width, 4.0))
        self.config.apply_base_style(ax)
        ax.set_xticks(np.arange(num_classes))
        ax.set_xlabel('class')
        return fig, ax

    def create_signal_bars(self, positive: np.ndarray, negative: Optional[np.ndarray] = None,
                           title: str = 'Detector signals') -> plt.Figure:
        """
        Bars of the detector signal of every class; grouped +/- bars for differential designs.

        Args:
            positive: (M,) positive (or single) detector signals
            negative: (M,) negative detector signals, if differential
        """
        positive = np.asarray(positive, dtype=np.float64)
        positions = np.arange(positive.shape[0])
        fig, ax = self._axes(positive.shape[0])
        if negative is None:
            ax.bar(positions, positive, width=0.57, edgecolor='black', linewidth=1.0,
                   color=self.config.get_color('score'), label='signal')
        else:
            ax.bar(positions - 0.2, positive, width=0.4, edgecolor='black', linewidth=1.0,
                   color=self.config.get_color('positive'), label='positive')
            ax.bar(positions + 0.2, np.asarray(negative, dtype=np.float64), width=0.4,
                   edgecolor='black', linewidth=1.0,
                   color=self.config.get_color('negative'), label='negative')
            ax.legend(frameon=False)
        ax.set_ylabel('optical power')
        ax.set_title(title)
        return fig

    def create_score_bars(self, scores: np.ndarray, title: str = 'Class scores') -> plt.Figure:
        """Bars of the class scores, the predicted (argmax) class highlighted."""
        scores = np.asarray(scores, dtype=np.float64)
        predicted = int(np.argmax(scores))
        colors = [self.config.get_color('predicted' if index == predicted else 'score')
                  for index in range(scores.shape[0])]
        fig, ax = self._axes(scores.shape[0])
        ax.bar(np.arange(scores.shape[0]), scores, width=0.57, color=colors,
               edgecolor='black', linewidth=1.0)
        ax.axhline(0.0, color='black', linewidth=0.8)
        ax.set_ylabel('score')
        ax.set_title(f"{title} (predicted {predicted})")
        return fig
