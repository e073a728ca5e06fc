#!/usr/bin/env python3
"""Tests for repetition summaries and design comparisons."""

import math
import unittest

import numpy as np
import pandas as pd
from hypothesis import given, settings
from hypothesis import strategies as st

from src.diffractive_classifier.core.processors import RepetitionSummary, StatisticsEngine


class TestSummaries(unittest.TestCase):
    """Test mean ± sample standard deviation summaries."""

    def setUp(self):
        self.engine = StatisticsEngine()

    def test_sample_standard_deviation(self):
        summary = self.engine.summarize([0.90, 0.92])
        self.assertEqual(summary.n, 2)
        self.assertAlmostEqual(summary.mean, 0.91, places=12)
        self.assertAlmostEqual(summary.std, 0.02 / math.sqrt(2), places=12)
        self.assertAlmostEqual(summary.sem, 0.01, places=12)
        self.assertEqual((summary.minimum, summary.maximum), (0.90, 0.92))
        self.assertEqual(summary.format(), '91.00 ± 1.41')

    def test_single_run_flagged(self):
        summary = self.engine.summarize([0.75])
        self.assertTrue(summary.single_run)
        self.assertEqual(summary.std, 0.0)
        self.assertEqual(summary.format(), '75.00 ± 0.00 (n=1)')

    def test_missing_values_dropped(self):
        summary = self.engine.summarize([0.8, np.nan, 0.6])
        self.assertEqual(summary.n, 2)
        self.assertAlmostEqual(summary.mean, 0.7, places=12)

    def test_empty_rejected(self):
        with self.assertRaises(ValueError):
            self.engine.summarize([])

    def test_format_digits(self):
        summary = RepetitionSummary(n=3, mean=0.5, std=0.125, sem=0.07, minimum=0.4, maximum=0.6)
        self.assertEqual(summary.format(scale=1.0, digits=3), '0.500 ± 0.125')


class TestComparisons(unittest.TestCase):
    """Test Welch comparisons between designs."""

    def setUp(self):
        self.engine = StatisticsEngine(alpha=0.05)

    def test_clear_difference(self):
        test = self.engine.welch_test([0.97, 0.971, 0.969, 0.972], [0.90, 0.905, 0.895, 0.90])
        self.assertTrue(test.significant)
        self.assertLess(test.p_value, 0.001)
        self.assertAlmostEqual(test.additional_info['mean_diff'], 0.0705, places=12)

    def test_identical_constant_groups(self):
        test = self.engine.welch_test([0.9, 0.9], [0.9, 0.9])
        self.assertEqual(test.p_value, 1.0)
        self.assertFalse(test.significant)

    def test_single_run_untestable(self):
        self.assertIsNone(self.engine.welch_test([0.9], [0.8, 0.85]))

    def test_compare_to_reference(self):
        runs = pd.DataFrame({
            'architecture': ['D([10,0],[1,5,40k])'] * 3 + ['D([10,10],[1,5,40k])'] * 3
                            + ['D([1][1],[20,5,40k])'],
            'test_accuracy': [0.90, 0.91, 0.92, 0.95, 0.96, 0.97, 0.99],
        })
        table = self.engine.compare_to_reference(runs, 'D([10,0],[1,5,40k])')
        self.assertEqual(table['architecture'].tolist(), runs['architecture'].unique().tolist())
        self.assertTrue(np.isnan(table.loc[0, 'p_value']))
        self.assertAlmostEqual(table.loc[1, 'mean_diff'], 0.05, places=12)
        self.assertTrue(table.loc[1, 'significant'])
        self.assertTrue(np.isnan(table.loc[2, 'p_value']))

    def test_significance_labels(self):
        label = StatisticsEngine.significance_label
        self.assertEqual(label(0.0005), '***')
        self.assertEqual(label(0.005), '**')
        self.assertEqual(label(0.03), '*')
        self.assertEqual(label(0.2), 'ns')
        self.assertEqual(label(float('nan')), '')
        self.assertEqual(label(None), '')


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=20))
def test_summary_matches_numpy(values):
    summary = StatisticsEngine().summarize(values)
    assert math.isclose(summary.mean, float(np.mean(values)), rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(summary.std, float(np.std(values, ddof=1)), rel_tol=1e-9, abs_tol=1e-12)
    assert summary.minimum <= summary.mean <= summary.maximum


if __name__ == '__main__':
    unittest.main()
