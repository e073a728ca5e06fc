"""Summary statistics of repeated training runs and comparisons between designs."""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats


@dataclass
class StatisticalTest:
    """Results from a statistical test."""
    test_name: str
    statistic: float
    p_value: float
    significant: bool
    alpha: float = 0.05
    additional_info: Dict[str, Any] = None

    def __repr__(self) -> str:
        sig_str = "significant" if self.significant else "not significant"
        return f"{self.test_name}: statistic={self.statistic:.4f}, p={self.p_value:.4f} ({sig_str})"


@dataclass
class RepetitionSummary:
    """Mean and sample spread of one design's accuracies over repetitions."""
    n: int
    mean: float
    std: float
    sem: float
    minimum: float
    maximum: float

    @property
    def single_run(self) -> bool:
        return self.n < 2

    def format(self, scale: float = 100.0, digits: int = 2) -> str:
        """'mean ± std' in percent, flagged when only one run exists."""
        text = f"{scale * self.mean:.{digits}f} ± {scale * self.std:.{digits}f}"
        return f"{text} (n=1)" if self.single_run else text


class StatisticsEngine:
    """
    Statistics over repeated runs.

    Features:
    - Repetition summaries with sample (n-1) standard deviation
    - Welch's t-test between two designs
    - Comparison of every design against a reference design
    """

    def __init__(self, alpha: float = 0.05):
        """
        Initialize statistics engine.

        Args:
            alpha: Significance level (default: 0.05)
        """
        self.alpha = alpha

    def summarize(self, values: Sequence[float]) -> RepetitionSummary:
        """
        Summarize accuracies of repeated runs.

        A single run reports a standard deviation of 0.

        Raises:
            ValueError: If no values are given
        """
        data = pd.Series(values, dtype=float).dropna()
        if data.empty:
            raise ValueError("no values to summarize")
        n = len(data)
        std = float(data.std(ddof=1)) if n > 1 else 0.0
        return RepetitionSummary(
            n=n,
            mean=float(data.mean()),
            std=std,
            sem=std / np.sqrt(n),
            minimum=float(data.min()),
            maximum=float(data.max()),
        )

    def welch_test(self, data1: Sequence[float], data2: Sequence[float]) -> Optional[StatisticalTest]:
        """
        Welch's unequal-variance t-test.

        Returns:
            StatisticalTest, or None when either group has fewer than 2 values
        """
        group1 = pd.Series(data1, dtype=float).dropna()
        group2 = pd.Series(data2, dtype=float).dropna()
        if len(group1) < 2 or len(group2) < 2:
            return None

        statistic, p_value = stats.ttest_ind(group1, group2, equal_var=False)
        if not np.isfinite(p_value):
            # Identical constant groups
            statistic, p_value = 0.0, 1.0
        return StatisticalTest(
            test_name="Welch's t-test",
            statistic=float(statistic),
            p_value=float(p_value),
            significant=p_value < self.alpha,
            alpha=self.alpha,
            additional_info={'mean_diff': float(group1.mean() - group2.mean())},
        )

    def compare_to_reference(self, runs: pd.DataFrame, reference: str,
                             group_col: str = 'architecture',
                             value_col: str = 'test_accuracy') -> pd.DataFrame:
        """
        Welch p-values of every group against a reference group.

        Args:
            runs: One row per run
            reference: Group value acting as reference
            group_col: Column naming the group
            value_col: Column with the measured values

        Returns:
            DataFrame with group, mean_diff and p_value (NaN where untestable)
        """
        reference_values = runs.loc[runs[group_col] == reference, value_col]
        rows = []
        for group, values in runs.groupby(group_col, sort=False)[value_col]:
            test = None if group == reference else self.welch_test(values, reference_values)
            rows.append({
                group_col: group,
                'mean_diff': test.additional_info['mean_diff'] if test else np.nan,
                'p_value': test.p_value if test else np.nan,
                'significant': bool(test.significant) if test else False,
            })
        return pd.DataFrame(rows)

    @staticmethod
    def significance_label(p_value: float) -> str:
        """Star label for a p-value ('' when untested)."""
        if p_value is None or not np.isfinite(p_value):
            return ''
        if p_value < 0.001:
            return '***'
        if p_value < 0.01:
            return '**'
        if p_value < 0.05:
            return '*'
        return 'ns'
