#!/usr/bin/env python3
"""Tests for the architecture notation parser and renderer."""

import unittest
from dataclasses import replace

from hypothesis import given, settings
from hypothesis import strategies as st

from src.diffractive_classifier.core.architecture import ArchitectureSpec, parse_notation, render
from src.diffractive_classifier.core.exceptions import ConfigError, NotationError

TABLE_ARCHITECTURES = [
    'D([10,0],[1,5,40k])',
    'D([10,10],[1,5,40k])',
    'D([5,0],[2,5,40k])',
    'D([5,5],[2,5,40k])',
    'D([2,0],[5,5,40k])',
    'D([2,2],[5,5,40k])',
    'D([1,0],[10,5,40k])',
    'D([1,1],[10,5,40k])',
    'D([10][10],[2,5,40k])',
    'D([5][5],[4,5,40k])',
    'D([2][2],[10,5,40k])',
    'D([1][1],[20,5,40k])',
]


class TestParseNotation(unittest.TestCase):
    """Test parsing of architecture strings."""

    def test_table_architectures_round_trip(self):
        for text in TABLE_ARCHITECTURES:
            spec = parse_notation(text, num_classes=10)
            self.assertEqual(render(spec), text)
            self.assertEqual(spec.total_neurons, spec.n_networks * 5 * 40000)

    def test_standard_design(self):
        spec = parse_notation('D([10,0],[1,5,40k])')
        self.assertEqual(spec.q_pos, 10)
        self.assertEqual(spec.q_neg, 0)
        self.assertFalse(spec.split_planes)
        self.assertEqual(spec.n_networks, 1)
        self.assertEqual(spec.layers_per_network, 5)
        self.assertEqual(spec.neurons_per_layer, 40000)
        self.assertEqual(spec.grid_size, 200)
        self.assertEqual(spec.family, 'non-differential')

    def test_split_design(self):
        spec = parse_notation('D([1][1],[20,5,40k])', num_classes=10)
        self.assertTrue(spec.split_planes)
        self.assertEqual(spec.n_groups, 10)
        self.assertEqual(spec.family, 'split differential')
        self.assertEqual(spec.negative_assignment()[3], 13)

    def test_whitespace_and_case(self):
        spec = parse_notation(' d( [10, 10] , [1, 5, 40K] ) ')
        self.assertEqual(spec.render(), 'D([10,10],[1,5,40k])')

    def test_learnable_coefficients_form(self):
        spec = parse_notation('D(p[5] n[5],[4,5,40k])', num_classes=10)
        self.assertTrue(spec.learnable_coefficients)
        self.assertTrue(spec.split_planes)
        self.assertEqual(spec.render(), 'D(p[5]n[5],[4,5,40k])')

    def test_plain_neuron_count(self):
        self.assertEqual(parse_notation('D([2,2],[1,2,256])').render(), 'D([2,2],[1,2,256])')
        self.assertEqual(parse_notation('D([2,2],[1,2,2500])').neurons_per_layer, 2500)

    def test_indivisible_classes(self):
        with self.assertRaises(ConfigError):
            parse_notation('D([3,0],[4,5,40k])', num_classes=10)

    def test_detector_count_mismatch(self):
        with self.assertRaises(ConfigError):
            parse_notation('D([4,0],[2,5,40k])', num_classes=10)

    def test_error_positions(self):
        with self.assertRaises(NotationError) as context:
            parse_notation('D([10;0],[1,5,40k])')
        self.assertEqual(context.exception.position, 5)

        with self.assertRaises(NotationError) as context:
            parse_notation('D([10,0],[1,5,40k])x')
        self.assertEqual(context.exception.position, 19)

        with self.assertRaises(NotationError) as context:
            parse_notation('D([10,0],[1,5,40k]')
        self.assertEqual(context.exception.position, 18)

    def test_unbalanced_differential_rejected(self):
        with self.assertRaises(NotationError):
            parse_notation('D([10,5],[1,5,40k])')

    def test_odd_split_network_count_rejected(self):
        with self.assertRaises(NotationError):
            parse_notation('D([1][1],[3,5,40k])')

    def test_non_square_neuron_count(self):
        with self.assertRaises(ConfigError):
            _ = parse_notation('D([10,0],[1,5,1000])').grid_size


class TestClassAssignment(unittest.TestCase):
    """Test class-to-network assignment."""

    def test_two_networks_contiguous_groups(self):
        spec = parse_notation('D([5,5],[2,5,40k])', num_classes=10)
        assignment = spec.class_assignment()
        self.assertEqual([assignment[c] for c in range(10)], [0] * 5 + [1] * 5)
        self.assertEqual(spec.negative_assignment(), assignment)

    def test_custom_class_order(self):
        spec = parse_notation('D([5,0],[2,5,40k])', num_classes=10)
        groups = spec.class_groups([0, 2, 4, 6, 8, 1, 3, 5, 7, 9])
        self.assertEqual(groups, [[0, 2, 4, 6, 8], [1, 3, 5, 7, 9]])

    def test_class_order_must_be_permutation(self):
        spec = parse_notation('D([5,0],[2,5,40k])', num_classes=10)
        with self.assertRaises(ConfigError):
            spec.class_groups([0] * 10)

    def test_unbound_classes(self):
        with self.assertRaises(ConfigError):
            parse_notation('D([5,0],[2,5,40k])').class_groups()

    def test_dict_round_trip(self):
        spec = replace(parse_notation('D([10,10],[1,5,40k])', num_classes=10),
                       learnable_coefficients=True)
        self.assertEqual(spec.render(), 'D([10,10],[1,5,40k])')
        self.assertEqual(ArchitectureSpec.from_dict(spec.to_dict()), spec)


@st.composite
def architecture_specs(draw):
    split = draw(st.booleans())
    differential = split or draw(st.booleans())
    q_pos = draw(st.integers(1, 50))
    n_networks = draw(st.integers(1, 25)) * (2 if split else 1)
    return ArchitectureSpec(
        q_pos=q_pos,
        q_neg=q_pos if differential else 0,
        split_planes=split,
        n_networks=n_networks,
        layers_per_network=draw(st.integers(1, 12)),
        neurons_per_layer=draw(st.integers(1, 10 ** 6)),
        learnable_coefficients=split and draw(st.booleans()),
    )


@settings(max_examples=300, deadline=None)
@given(architecture_specs())
def test_render_parse_round_trip(spec):
    assert parse_notation(render(spec)) == spec


@settings(max_examples=100, deadline=None)
@given(architecture_specs(), st.integers(1, 4))
def test_group_sizes_match_detectors(spec, multiple):
    num_classes = spec.n_groups * spec.q_pos
    bound = spec.with_classes(num_classes)
    groups = bound.class_groups()
    assert len(groups) == spec.n_groups
    assert all(len(group) == spec.q_pos for group in groups)
    if multiple > 1:
        try:
            spec.with_classes(num_classes * multiple)
        except ConfigError:
            pass
        else:
            raise AssertionError("mismatched class count was accepted")


if __name__ == '__main__':
    unittest.main()
