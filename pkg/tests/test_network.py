#!/usr/bin/env python3
"""Tests for phase modulation, network forward passes and adjoint gradients."""

import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from src.diffractive_classifier.core.exceptions import ShapeError, StateError
from src.diffractive_classifier.core.optics import (
    CapturedStages,
    ComplexField,
    DiffractiveNetwork,
    PhaseLayer,
    PropagationGeometry,
    adjoint_backward,
    adjoint_propagate,
    forward,
    modulate,
    propagate,
)


def random_field(size, seed=0, batch=()):
    rng = np.random.default_rng(seed)
    shape = tuple(batch) + (size, size)
    return ComplexField(rng.normal(size=shape) + 1j * rng.normal(size=shape), pitch=0.5)


def detector_mask(size):
    mask = np.zeros((size, size), dtype=bool)
    mask[3:6, 4:8] = True
    mask[10:13, 9:12] = True
    return mask


def masked_power(network, field, mask):
    return float(forward(network, field).intensity()[..., mask].sum())


class TestModulate(unittest.TestCase):
    """Test phase-only modulation."""

    def test_zero_phase_is_identity(self):
        field = random_field(8)
        out = modulate(field, PhaseLayer(np.zeros((8, 8))))
        np.testing.assert_array_equal(out.values, field.values)

    def test_pi_phase_negates(self):
        field = random_field(8)
        out = modulate(field, PhaseLayer(np.full((8, 8), np.pi)))
        np.testing.assert_allclose(out.values, -field.values, rtol=0, atol=1e-15)

    def test_magnitude_preserved(self):
        field = random_field(8, seed=1)
        phase = np.random.default_rng(2).uniform(-10, 10, size=(8, 8))
        out = modulate(field, PhaseLayer(phase))
        np.testing.assert_allclose(np.abs(out.values), np.abs(field.values), rtol=1e-15)

    def test_grid_mismatch_raises(self):
        with self.assertRaises(ShapeError):
            modulate(random_field(8), PhaseLayer(np.zeros((4, 4))))


class TestForward(unittest.TestCase):
    """Test the network forward model."""

    def setUp(self):
        self.geometry = PropagationGeometry(layer_spacing=10.0, pad_factor=1)

    def test_no_layers_is_total_propagation(self):
        network = DiffractiveNetwork([], self.geometry, input_distance=4.0, output_distance=6.0)
        field = random_field(16)
        out = forward(network, field)
        expected = propagate(field, 10.0, self.geometry)
        self.assertLessEqual(np.linalg.norm(out.values - expected.values)
                             / np.linalg.norm(expected.values), 1e-9)

    def test_zero_phases_equal_single_propagation(self):
        layers = [PhaseLayer(np.zeros((16, 16))) for _ in range(3)]
        network = DiffractiveNetwork(layers, self.geometry)
        self.assertEqual(network.total_distance, 40.0)
        field = random_field(16, seed=4)
        out = forward(network, field)
        expected = propagate(field, network.total_distance, self.geometry)
        self.assertLessEqual(np.linalg.norm(out.values - expected.values)
                             / np.linalg.norm(expected.values), 1e-9)

    def test_distances_default_to_spacing(self):
        network = DiffractiveNetwork([PhaseLayer(np.zeros((4, 4)))], self.geometry)
        self.assertEqual(network.input_distance, 10.0)
        self.assertEqual(network.output_distance, 10.0)

    def test_same_seed_same_network(self):
        first = DiffractiveNetwork.create(8, 2, self.geometry, np.random.default_rng(5))
        second = DiffractiveNetwork.create(8, 2, self.geometry, np.random.default_rng(5))
        for a, b in zip(first.layers, second.layers):
            np.testing.assert_array_equal(a.phase, b.phase)

    def test_stages_captured(self):
        network = DiffractiveNetwork.create(8, 2, self.geometry, np.random.default_rng(0))
        stages = CapturedStages()
        out = forward(network, random_field(8), stages)
        self.assertTrue(stages.complete)
        self.assertEqual(len(stages.arriving), 2)
        self.assertEqual(len(stages.modulated), 2)
        np.testing.assert_array_equal(stages.output, out.values)

    def test_input_grid_mismatch_raises(self):
        network = DiffractiveNetwork.create(8, 1, self.geometry, np.random.default_rng(0))
        with self.assertRaises(ShapeError):
            forward(network, random_field(16))

    def test_parameters_are_live_arrays(self):
        network = DiffractiveNetwork.create(8, 2, self.geometry, np.random.default_rng(0))
        params = network.parameters(prefix='net0.')
        self.assertEqual(sorted(params), ['net0.layer0', 'net0.layer1'])
        self.assertIs(params['net0.layer1'], network.layers[1].phase)


class TestAdjointBackward(unittest.TestCase):
    """Test exact adjoint gradients."""

    def setUp(self):
        self.geometry = PropagationGeometry(layer_spacing=10.0, pad_factor=2)
        self.network = DiffractiveNetwork.create(16, 2, self.geometry,
                                                 np.random.default_rng(8), phase_std=1.0)

    def test_missing_stages_raise(self):
        cotangent = random_field(16)
        with self.assertRaises(StateError):
            adjoint_backward(self.network, cotangent, None)
        with self.assertRaises(StateError):
            adjoint_backward(self.network, cotangent, CapturedStages())

    def test_zero_cotangent_gives_zero_gradients(self):
        stages = CapturedStages()
        out = forward(self.network, random_field(16), stages)
        _, grads = adjoint_backward(self.network, out.with_values(np.zeros_like(out.values)),
                                    stages)
        for grad in grads:
            self.assertTrue(np.all(grad == 0))

    def test_gradients_scale_with_cotangent(self):
        stages = CapturedStages()
        forward(self.network, random_field(16, seed=12), stages)
        cotangent = random_field(16, seed=13)
        back, grads = adjoint_backward(self.network, cotangent, stages)
        scaled_back, scaled = adjoint_backward(
            self.network, cotangent.with_values(-2.5 * cotangent.values), stages)
        for grad, scaled_grad in zip(grads, scaled):
            np.testing.assert_allclose(scaled_grad, -2.5 * grad, rtol=1e-12,
                                       atol=1e-12 * np.abs(grad).max())
        np.testing.assert_allclose(scaled_back.values, -2.5 * back.values, rtol=1e-12,
                                   atol=1e-12 * np.abs(back.values).max())

    @settings(max_examples=25, deadline=None)
    @given(st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False))
    def test_gradients_linear_in_real_scale(self, scale):
        stages = CapturedStages()
        forward(self.network, random_field(16, seed=14), stages)
        cotangent = random_field(16, seed=15)
        _, grads = adjoint_backward(self.network, cotangent, stages)
        _, scaled = adjoint_backward(
            self.network, cotangent.with_values(scale * cotangent.values), stages)
        for grad, scaled_grad in zip(grads, scaled):
            np.testing.assert_allclose(scaled_grad, scale * grad, rtol=1e-10,
                                       atol=1e-12 * max(abs(scale), 1.0) * np.abs(grad).max())

    def test_input_cotangent_of_empty_network(self):
        geometry = PropagationGeometry(layer_spacing=10.0, pad_factor=1)
        network = DiffractiveNetwork([], geometry, input_distance=3.0, output_distance=5.0)
        stages = CapturedStages()
        forward(network, random_field(16), stages)
        cotangent = random_field(16, seed=9)
        back, grads = adjoint_backward(network, cotangent, stages)
        self.assertEqual(grads, [])
        expected = adjoint_propagate(cotangent, 8.0, geometry)
        np.testing.assert_allclose(back.values, expected.values, rtol=0, atol=1e-12)

    def test_phase_gradients_match_finite_differences(self):
        """Total detector power: every coordinate against central differences."""
        field = random_field(16, seed=10)
        mask = detector_mask(16)

        stages = CapturedStages()
        out = forward(self.network, field, stages)
        cotangent = out.with_values(np.where(mask, out.values, 0))
        _, grads = adjoint_backward(self.network, cotangent, stages)

        step = 1e-6
        for index, layer in enumerate(self.network.layers):
            numeric = np.zeros_like(layer.phase)
            for row in range(16):
                for col in range(16):
                    original = layer.phase[row, col]
                    layer.phase[row, col] = original + step
                    upper = masked_power(self.network, field, mask)
                    layer.phase[row, col] = original - step
                    lower = masked_power(self.network, field, mask)
                    layer.phase[row, col] = original
                    numeric[row, col] = (upper - lower) / (2 * step)
            np.testing.assert_allclose(grads[index], numeric, rtol=1e-6,
                                       atol=1e-6 * np.abs(numeric).max(),
                                       err_msg=f"layer {index}")

    def test_batch_gradient_is_sum(self):
        batch = random_field(16, seed=20, batch=(2,))
        stages = CapturedStages()
        out = forward(self.network, batch, stages)
        _, batch_grads = adjoint_backward(self.network, out, stages)

        summed = [np.zeros((16, 16)) for _ in self.network.layers]
        for sample in range(2):
            single_stages = CapturedStages()
            single_out = forward(self.network, ComplexField(batch.values[sample]), single_stages)
            _, grads = adjoint_backward(self.network, single_out, single_stages)
            for index, grad in enumerate(grads):
                summed[index] += grad
        for batch_grad, expected in zip(batch_grads, summed):
            np.testing.assert_allclose(batch_grad, expected, rtol=1e-10, atol=1e-12)


if __name__ == '__main__':
    unittest.main()
