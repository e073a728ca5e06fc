#!/usr/bin/env python3
"""Tests for incoherent ensembles and checkpoint selection."""

import unittest
from dataclasses import replace

import numpy as np

from src.diffractive_classifier.core.architecture import (
    EnsembleCandidate,
    EnsembleSystem,
    ensemble_forward,
    instantiate,
    parse_notation,
    select_ensemble,
    system_forward,
)
from src.diffractive_classifier.core.detection import DetectorLayout, DetectorRegion
from src.diffractive_classifier.core.exceptions import ConfigError
from src.diffractive_classifier.core.optics import ComplexField, PropagationGeometry

GEOMETRY = PropagationGeometry(layer_spacing=5.0)


def two_class_layouts(offset=0.0):
    return [DetectorLayout(0, [DetectorRegion((-2 + offset, 0), 0, width=1.0),
                               DetectorRegion((2 + offset, 0), 1, width=1.0)])]


def make_unit(seed, layouts=None):
    spec = parse_notation('D([2,0],[1,2,256])', num_classes=2)
    return instantiate(spec, GEOMETRY, seed=seed, layouts=layouts or two_class_layouts())


def inputs(seed=0, batch=3):
    rng = np.random.default_rng(seed)
    return ComplexField(rng.uniform(size=(batch, 16, 16)) + 0j)


def crafted_signals(labels, correct):
    """Single-plane signals predicting ``labels`` for the first ``correct`` samples."""
    signals = np.zeros((len(labels), 2))
    for index, label in enumerate(labels):
        winner = label if index < correct else 1 - label
        signals[index, winner] = 1.0
        signals[index, 1 - winner] = 0.5
    return [signals]


class TestEnsembleForward(unittest.TestCase):
    """Test incoherent summation of unit signals."""

    def test_single_unit_equals_system(self):
        unit = make_unit(0)
        field = inputs()
        np.testing.assert_array_equal(ensemble_forward(EnsembleSystem([unit]), field).raw,
                                      system_forward(unit, field).raw)

    def test_copies_scale_signals(self):
        unit = make_unit(1)
        field = inputs(seed=1)
        single = unit.run(field).signals[0]
        ensemble = EnsembleSystem([unit, unit, unit])
        np.testing.assert_allclose(ensemble.detector_signals(field)[0], 3 * single, rtol=1e-15)
        np.testing.assert_array_equal(
            np.argmax(ensemble_forward(ensemble, field).raw, axis=-1),
            np.argmax(system_forward(unit, field).raw, axis=-1))

    def test_sum_matches_sequential_evaluation(self):
        units = [make_unit(seed) for seed in range(3)]
        field = inputs(seed=2)
        expected = units[0].run(field).signals[0].copy()
        for unit in units[1:]:
            expected += unit.run(field).signals[0]
        ensemble = EnsembleSystem(units)
        np.testing.assert_array_equal(ensemble.detector_signals(field)[0], expected)
        np.testing.assert_array_equal(ensemble.detector_signals(field, max_workers=2)[0],
                                      expected)

    def test_output_intensity_sums(self):
        units = [make_unit(seed) for seed in range(2)]
        field = ComplexField.plane_wave(16)
        total = EnsembleSystem(units).output_intensity(field)[0]
        expected = units[0].output_intensities(field)[0] + units[1].output_intensities(field)[0]
        np.testing.assert_allclose(total, expected, rtol=1e-15)

    def test_mismatched_layouts_rejected(self):
        with self.assertRaises(ConfigError):
            EnsembleSystem([make_unit(0), make_unit(1, two_class_layouts(offset=0.5))])

    def test_empty_ensemble_rejected(self):
        with self.assertRaises(ConfigError):
            EnsembleSystem([])

    def test_learnable_units_rejected(self):
        spec = replace(parse_notation('D([1,1],[2,1,256])', num_classes=2),
                       learnable_coefficients=True)
        layouts = [DetectorLayout(0, [DetectorRegion((-2, 0), 0, 'positive', 1.0),
                                      DetectorRegion((2, 0), 0, 'negative', 1.0)]),
                   DetectorLayout(1, [DetectorRegion((-2, 0), 1, 'positive', 1.0),
                                      DetectorRegion((2, 0), 1, 'negative', 1.0)])]
        unit = instantiate(spec, GEOMETRY, layouts=layouts)
        with self.assertRaises(ConfigError):
            EnsembleSystem([unit])


class TestSelectEnsemble(unittest.TestCase):
    """Test validation-based checkpoint selection."""

    def setUp(self):
        self.labels = np.arange(100) % 2
        self.unit = make_unit(0)

    def candidate(self, label, correct):
        return EnsembleCandidate(label, self.unit, crafted_signals(self.labels, correct))

    def test_picks_best_single_checkpoint(self):
        selection = select_ensemble([[self.candidate('epoch1', 95),
                                      self.candidate('epoch2', 97)]], self.labels)
        self.assertEqual(selection.combination, ('epoch2',))
        self.assertAlmostEqual(selection.accuracy, 0.97)
        self.assertEqual(selection.ensemble.combination, ['epoch2'])

    def test_two_units_top_three(self):
        units = [[self.candidate(f"u{unit}e{epoch}", 90 + epoch) for epoch in range(4)]
                 for unit in range(2)]
        selection = select_ensemble(units, self.labels, top_k=3)
        self.assertEqual(selection.combinations_evaluated, 9)
        self.assertEqual(selection.retained, [['u0e3', 'u0e2', 'u0e1'], ['u1e3', 'u1e2', 'u1e1']])
        self.assertEqual(len(selection.ensemble.units), 2)

    def test_selection_at_least_best_solo(self):
        candidates = [[self.candidate('a', 60), self.candidate('b', 80)]]
        selection = select_ensemble(candidates, self.labels)
        best_solo = max(candidate.solo_accuracy for candidate in candidates[0])
        self.assertGreaterEqual(selection.accuracy, best_solo)

    def test_solo_ties_keep_earlier(self):
        selection = select_ensemble([[self.candidate('first', 70),
                                      self.candidate('second', 70)]], self.labels, top_k=1)
        self.assertEqual(selection.retained, [['first']])

    def test_empty_candidates_rejected(self):
        with self.assertRaises(ConfigError):
            select_ensemble([], self.labels)
        with self.assertRaises(ConfigError):
            select_ensemble([[]], self.labels)

    def test_invalid_top_k(self):
        with self.assertRaises(ConfigError):
            select_ensemble([[self.candidate('a', 50)]], self.labels, top_k=0)


if __name__ == '__main__':
    unittest.main()
