#!/usr/bin/env python3
"""Tests for the loss, optimiser, schedules and training loops."""

import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from src.diffractive_classifier.core.architecture import instantiate, parse_notation
from src.diffractive_classifier.core.detection import ClassScores, DetectorLayout, DetectorRegion
from src.diffractive_classifier.core.exceptions import ConfigError, NumericError
from src.diffractive_classifier.core.models import Dataset, DatasetSplits, ImageSet
from src.diffractive_classifier.core.optics import PropagationGeometry
from src.diffractive_classifier.core.processors import EncodingSpec
from src.diffractive_classifier.core.training import (
    Adam,
    ExperimentReport,
    RepetitionResult,
    TrainConfig,
    TrainState,
    evaluate,
    fit,
    loss,
    run_experiment,
    softmax_cross_entropy,
    train_epoch,
)

ENCODING = EncodingSpec('amplitude', upsample=2)


def toy_system(seed=0):
    spec = parse_notation('D([2,0],[1,2,256])', num_classes=2)
    layouts = [DetectorLayout(0, [DetectorRegion((-2, 0), 0, width=2.0),
                                  DetectorRegion((2, 0), 1, width=2.0)])]
    return instantiate(spec, PropagationGeometry(layer_spacing=5.0), seed=seed, layouts=layouts)


def toy_images(count, seed=0):
    """4x4 images lit on the left half for class 0 and the right half for class 1."""
    rng = np.random.default_rng(seed)
    labels = np.arange(count) % 2
    pixels = rng.uniform(0.0, 0.2, size=(count, 4, 4))
    for index, label in enumerate(labels):
        if label == 0:
            pixels[index, :, :2] += 0.8
        else:
            pixels[index, :, 2:] += 0.8
    return ImageSet(pixels, labels, num_classes=2)


def toy_dataset():
    pool = toy_images(16, seed=1)
    test_pool = toy_images(6, seed=2)
    splits = DatasetSplits.from_pool(16, 6, seed=0, validation_size=4)
    return Dataset('mnist', pool, test_pool, splits)


class TestLoss(unittest.TestCase):
    """Test softmax cross-entropy."""

    def test_uniform_scores(self):
        value, _ = softmax_cross_entropy(np.zeros((1, 10)), np.array([3]))
        self.assertAlmostEqual(value, math.log(10), places=12)

    def test_two_class_closed_form(self):
        value = loss(ClassScores(np.array([[0.6, -0.6]]), temperature=0.1), np.array([0]))
        self.assertAlmostEqual(value / math.log1p(math.exp(-12.0)), 1.0, places=9)
        self.assertAlmostEqual(value, 6.144e-6, delta=1e-9)

    def test_confident_true_class(self):
        value, _ = softmax_cross_entropy(np.array([[1000.0, 0.0, 0.0]]), np.array([0]))
        self.assertEqual(value, 0.0)

    def test_gradient(self):
        rng = np.random.default_rng(0)
        scaled = rng.normal(size=(3, 4))
        labels = np.array([0, 3, 1])
        _, grad = softmax_cross_entropy(scaled, labels)
        step = 1e-6
        for index in np.ndindex(scaled.shape):
            upper, lower = scaled.copy(), scaled.copy()
            upper[index] += step
            lower[index] -= step
            numeric = (softmax_cross_entropy(upper, labels)[0]
                       - softmax_cross_entropy(lower, labels)[0]) / (2 * step)
            self.assertAlmostEqual(grad[index], numeric, places=8)

    def test_gradient_rows_sum_to_zero(self):
        _, grad = softmax_cross_entropy(np.array([[1.0, 2.0, 3.0]]), np.array([2]))
        self.assertAlmostEqual(grad.sum(), 0.0, places=14)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (4, 5), elements=st.floats(-50, 50)), st.floats(-100, 100))
def test_loss_shift_invariance(scaled, shift):
    labels = np.array([0, 1, 2, 4])
    base = softmax_cross_entropy(scaled, labels)[0]
    shifted = softmax_cross_entropy(scaled + shift, labels)[0]
    assert abs(base - shifted) <= 1e-12 * max(1.0, abs(base))


class TestSchedules(unittest.TestCase):
    """Test learning-rate and temperature schedules."""

    def test_learning_rate_steps(self):
        config = TrainConfig()
        self.assertEqual(config.learning_rate(0), 0.001)
        self.assertEqual(config.learning_rate(7), 0.001)
        self.assertAlmostEqual(config.learning_rate(8), 0.0007, places=15)
        self.assertAlmostEqual(config.learning_rate(16), 0.00049, places=15)

    def test_constant_temperature(self):
        config = TrainConfig()
        self.assertEqual(config.temperature(0), 0.1)
        self.assertEqual(config.temperature(49), 0.1)

    def test_exponential_temperature(self):
        config = TrainConfig(temperature_schedule='exp_growth')
        self.assertEqual(config.temperature(24), 0.1)
        self.assertAlmostEqual(config.temperature(25), 0.1 * math.e, places=14)
        self.assertAlmostEqual(config.temperature(50), 0.1 * math.e ** 2, places=14)

    def test_invalid_settings(self):
        with self.assertRaises(ConfigError):
            TrainConfig(batch_size=0)
        with self.assertRaises(ConfigError):
            TrainConfig(temperature_schedule='cosine')
        with self.assertRaises(ConfigError):
            TrainConfig.from_dict({'epochs': 3, 'momentum': 0.9})

    def test_dict_round_trip(self):
        config = TrainConfig(epochs=3, batch_size=8, lr_initial=0.01)
        self.assertEqual(TrainConfig.from_dict(config.to_dict()), config)
        self.assertEqual(TrainConfig.from_json(config.to_json()), config)


class TestAdam(unittest.TestCase):
    """Test the Adam optimiser."""

    def test_first_step_is_lr_times_sign(self):
        for gradient in (0.37, -12.5, 3e-4):
            params = {'w': np.array([1.0])}
            Adam().step(params, {'w': np.array([gradient])}, lr=0.01)
            self.assertAlmostEqual((1.0 - params['w'][0]) / (0.01 * np.sign(gradient)), 1.0,
                                   places=4)

    def test_zero_learning_rate_keeps_parameters(self):
        params = {'w': np.array([1.0, -2.0])}
        optimizer = Adam()
        optimizer.step(params, {'w': np.array([0.5, 0.5])}, lr=0.0)
        np.testing.assert_array_equal(params['w'], [1.0, -2.0])
        self.assertEqual(optimizer.t, 1)

    def test_missing_gradient_skipped(self):
        params = {'a': np.array([1.0]), 'b': np.array([1.0])}
        Adam().step(params, {'a': np.array([1.0])}, lr=0.1)
        self.assertEqual(params['b'][0], 1.0)
        self.assertLess(params['a'][0], 1.0)

    def test_state_arrays_round_trip(self):
        params = {'w': np.array([1.0, 2.0])}
        optimizer = Adam()
        optimizer.step(params, {'w': np.array([0.1, -0.2])}, lr=0.01)
        restored = Adam()
        restored.load_state_arrays(optimizer.state_arrays(), optimizer.t)
        self.assertEqual(sorted(optimizer.state_arrays()), ['adam.m.w', 'adam.v.w'])

        grads = {'w': np.array([0.3, 0.3])}
        first, second = {'w': params['w'].copy()}, {'w': params['w'].copy()}
        optimizer.step(first, grads, lr=0.01)
        restored.step(second, grads, lr=0.01)
        np.testing.assert_array_equal(first['w'], second['w'])

    def test_record_best_keeps_earliest(self):
        state = TrainState.create()
        params = {'w': np.array([1.0])}
        self.assertTrue(state.record_best(0, 0.5, params))
        params['w'][0] = 2.0
        self.assertFalse(state.record_best(1, 0.5, params))
        self.assertEqual(state.best_epoch, 0)
        self.assertEqual(state.best_parameters['w'][0], 1.0)


class TestTrainingLoops(unittest.TestCase):
    """Test train_epoch, evaluate and fit on a toy problem."""

    def setUp(self):
        self.dataset = toy_dataset()
        self.config = TrainConfig(epochs=2, batch_size=4, lr_initial=0.05)

    def test_zero_learning_rate_epoch(self):
        system = toy_system()
        before = {name: value.copy() for name, value in system.parameters().items()}
        config = TrainConfig(epochs=1, batch_size=4, lr_initial=0.0)
        state = train_epoch(system, self.dataset.train, config, TrainState.create(), ENCODING)
        self.assertEqual(state.epoch, 1)
        for name, value in system.parameters().items():
            np.testing.assert_array_equal(value, before[name])

    def test_epoch_record(self):
        system = toy_system()
        state = train_epoch(system, self.dataset.train, self.config, TrainState.create(), ENCODING)
        record = state.history[-1]
        self.assertEqual(record['split'], 'train')
        self.assertEqual(record['epoch'], 0)
        self.assertEqual(record['lr'], 0.05)
        self.assertEqual(record['T'], 0.1)
        self.assertTrue(np.isfinite(record['loss']))
        self.assertTrue(0.0 <= record['accuracy'] <= 1.0)

    def test_epoch_is_deterministic(self):
        first, second = toy_system(), toy_system()
        train_epoch(first, self.dataset.train, self.config, TrainState.create(), ENCODING, seed=4)
        train_epoch(second, self.dataset.train, self.config, TrainState.create(), ENCODING, seed=4)
        for name, value in first.parameters().items():
            np.testing.assert_array_equal(value, second.parameters()[name])

    def test_empty_split_rejected(self):
        empty = ImageSet(np.zeros((0, 4, 4)), np.zeros(0), num_classes=2)
        with self.assertRaises(ConfigError):
            train_epoch(toy_system(), empty, self.config, TrainState.create(), ENCODING)
        with self.assertRaises(ConfigError):
            evaluate(toy_system(), empty, ENCODING)

    def test_non_finite_phases_raise(self):
        system = toy_system()
        system.networks[0].layers[0].phase[0, 0] = np.nan
        with self.assertRaises(NumericError):
            train_epoch(system, self.dataset.train, self.config, TrainState.create(), ENCODING)

    def test_evaluate_ignores_temperature(self):
        system = toy_system()
        cold = evaluate(system, self.dataset.test, ENCODING, temperature=0.1)
        hot = evaluate(system, self.dataset.test, ENCODING, temperature=10.0)
        np.testing.assert_array_equal(cold.predictions, hot.predictions)
        self.assertEqual(cold.accuracy, hot.accuracy)
        self.assertNotEqual(cold.loss, hot.loss)

    def test_evaluate_confusion(self):
        result = evaluate(toy_system(), self.dataset.test, ENCODING, batch_size=4)
        self.assertEqual(result.total, 6)
        self.assertEqual(int(result.confusion.values.sum()), 6)
        self.assertEqual(int(np.trace(result.confusion.values)), result.correct)
        self.assertIsNone(result.loss)
        self.assertEqual(result.signals[0].shape, (6, 2))
        self.assertIn('accuracy', result.summary())

    def test_fit_keeps_best_epoch(self):
        system = toy_system()
        seen = []
        result = fit(system, self.dataset, self.config, ENCODING, seed=1,
                     on_epoch=lambda epoch, _system, _state, records: seen.append(
                         (epoch, [record['split'] for record in records])))
        self.assertEqual(seen, [(0, ['train', 'validation']), (1, ['train', 'validation'])])
        history = result.history
        self.assertEqual(len(history), 4)
        validation = history[history['split'] == 'validation']
        best = int(validation['accuracy'].values.argmax())
        self.assertEqual(result.best_epoch, best)
        self.assertEqual(result.best_val_accuracy, validation['accuracy'].max())
        for name, value in result.system.parameters().items():
            np.testing.assert_array_equal(value, result.state.best_parameters[name])


class TestExperiment(unittest.TestCase):
    """Test repeated runs and their report."""

    def test_report_statistics(self):
        report = ExperimentReport('D([10,0],[1,5,40k])', 'mnist', [
            RepetitionResult(0, 3, 0.9, 0.90),
            RepetitionResult(1, 4, 0.9, 0.92),
        ])
        self.assertAlmostEqual(report.mean, 0.91)
        self.assertAlmostEqual(report.std, math.sqrt(2) * 0.01)
        self.assertEqual(report.format_accuracy(), '91.00 ± 1.41')
        self.assertEqual(list(report.to_frame().columns),
                         ['seed', 'best_epoch', 'val_accuracy', 'test_accuracy'])

    def test_single_repetition_flagged(self):
        report = ExperimentReport('D([10,0],[1,5,40k])', 'mnist',
                                  [RepetitionResult(0, 1, 0.8, 0.75)])
        self.assertEqual(report.std, 0.0)
        self.assertTrue(report.to_row()['single_run'])
        self.assertEqual(report.format_accuracy(), '75.00 ± 0.00 (n=1)')

    def test_identical_seeds_identical_results(self):
        dataset = toy_dataset()
        config = TrainConfig(epochs=1, batch_size=4, lr_initial=0.05)
        report = run_experiment('D([2,0],[1,2,256])', dataset, config, ENCODING, seeds=[3, 3],
                                build_system=lambda spec, seed: toy_system(seed))
        first, second = report.repetitions
        self.assertEqual(first.test_accuracy, second.test_accuracy)
        self.assertEqual(first.val_accuracy, second.val_accuracy)
        self.assertEqual(report.std, 0.0)
        self.assertFalse(report.single_run)


if __name__ == '__main__':
    unittest.main()
