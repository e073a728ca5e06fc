#!/usr/bin/env python3
"""Tests for checkpoints, metrics logs, comparison tables and field dumps."""

import tempfile
import unittest
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd
from openpyxl import load_workbook

from src.diffractive_classifier.core.architecture import instantiate, parse_notation
from src.diffractive_classifier.core.detection import DetectorLayout, DetectorRegion
from src.diffractive_classifier.core.exceptions import ConfigError, DataFormatError
from src.diffractive_classifier.core.exporters import (
    ComparisonTableExporter,
    MetricsLog,
    OutputLock,
    atomic_write,
    dump_field,
    dump_stages,
    load_checkpoint,
    read_metrics,
    read_raw,
    save_checkpoint,
)
from src.diffractive_classifier.core.exporters.checkpoint import checkpoint_bytes
from src.diffractive_classifier.core.optics import ComplexField, PropagationGeometry
from src.diffractive_classifier.core.processors import StatisticsEngine
from src.diffractive_classifier.core.training import Adam

GEOMETRY = PropagationGeometry(layer_spacing=5.0, evanescent_policy='decay')


def learnable_system(seed=0):
    spec = replace(parse_notation('D([2,2],[1,2,256])', num_classes=2),
                   learnable_coefficients=True)
    layouts = [DetectorLayout(0, [DetectorRegion((-2, 2), 0, 'positive', 1.0),
                                  DetectorRegion((2, 2), 0, 'negative', 1.0),
                                  DetectorRegion((-2, -2), 1, 'positive', 1.0),
                                  DetectorRegion((2, -2), 1, 'negative', 1.0)])]
    return instantiate(spec, GEOMETRY, seed=seed, layouts=layouts, input_distance=3.0)


def stepped_optimizer(system):
    optimizer = Adam()
    rng = np.random.default_rng(1)
    params = system.parameters()
    grads = {name: rng.normal(size=value.shape) for name, value in params.items()}
    optimizer.step(params, grads, lr=0.01)
    return optimizer


class TempDirTestCase(unittest.TestCase):

    def setUp(self):
        self._temp = tempfile.TemporaryDirectory()
        self.root = Path(self._temp.name)

    def tearDown(self):
        self._temp.cleanup()


class TestCheckpoint(TempDirTestCase):
    """Test checkpoint persistence."""

    def test_round_trip_is_bit_identical(self):
        system = learnable_system()
        optimizer = stepped_optimizer(system)
        path = save_checkpoint(self.root / 'best.ckpt', system, optimizer, {'epoch': 3})
        loaded = load_checkpoint(path)

        self.assertEqual(loaded.metadata, {'epoch': 3})
        self.assertEqual(loaded.system.spec, system.spec)
        self.assertEqual(loaded.system.layouts, system.layouts)
        self.assertEqual(loaded.system.networks[0].input_distance, 3.0)
        self.assertEqual(loaded.system.geometry, system.geometry)
        for name, value in system.parameters().items():
            np.testing.assert_array_equal(loaded.system.parameters()[name], value)
        self.assertEqual(loaded.optimizer.t, 1)
        for name, value in optimizer.state_arrays().items():
            np.testing.assert_array_equal(loaded.optimizer.state_arrays()[name], value)

        field = ComplexField(np.random.default_rng(2).uniform(size=(2, 16, 16)) + 0j)
        np.testing.assert_array_equal(loaded.system.run(field).scores.raw,
                                      system.run(field).scores.raw)

    def test_bytes_are_deterministic(self):
        first = checkpoint_bytes(learnable_system(seed=4), metadata={'seed': 4})
        second = checkpoint_bytes(learnable_system(seed=4), metadata={'seed': 4})
        self.assertEqual(first, second)

    def test_without_optimizer(self):
        path = save_checkpoint(self.root / 'plain.ckpt', learnable_system())
        self.assertIsNone(load_checkpoint(path).optimizer)

    def test_unsupported_version(self):
        data = checkpoint_bytes(learnable_system())
        path = self.root / 'future.ckpt'
        path.write_bytes(data.replace(b'DIFFRACTIVE-CHECKPOINT 1', b'DIFFRACTIVE-CHECKPOINT 2', 1))
        with self.assertRaises(DataFormatError) as context:
            load_checkpoint(path)
        self.assertIn('version 2', str(context.exception))

    def test_wrong_magic(self):
        path = self.root / 'other.ckpt'
        path.write_bytes(b'PNG\n' + checkpoint_bytes(learnable_system()))
        with self.assertRaises(DataFormatError) as context:
            load_checkpoint(path)
        self.assertEqual(context.exception.offset, 0)

    def test_truncated_arrays(self):
        path = self.root / 'short.ckpt'
        path.write_bytes(checkpoint_bytes(learnable_system())[:-8])
        with self.assertRaises(DataFormatError):
            load_checkpoint(path)

    def test_trailing_bytes(self):
        path = self.root / 'long.ckpt'
        path.write_bytes(checkpoint_bytes(learnable_system()) + b'\0' * 8)
        with self.assertRaises(DataFormatError):
            load_checkpoint(path)

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            load_checkpoint(self.root / 'absent.ckpt')


class TestMetricsLog(TempDirTestCase):
    """Test key=value metrics logs."""

    def test_records_read_back_exactly(self):
        log = MetricsLog(self.root / 'run' / 'metrics.log')
        log.append({'epoch': 0, 'train_loss': 0.1 + 0.2, 'val_accuracy': 0.5})
        log.append({'epoch': 1, 'train_loss': 1 / 3, 'val_accuracy': 0.75})
        text = log.path.read_text()
        self.assertTrue(text.startswith('epoch=0 train_loss=0.30000000000000004 '))
        frame = read_metrics(log.path)
        self.assertEqual(frame['epoch'].tolist(), [0, 1])
        self.assertEqual(frame.loc[1, 'train_loss'], 1 / 3)
        pd.testing.assert_frame_equal(frame, log.to_frame())

    def test_rejects_spaces(self):
        log = MetricsLog(self.root / 'metrics.log')
        with self.assertRaises(ValueError):
            log.append({'train loss': 1.0})
        with self.assertRaises(ValueError):
            log.append({'note': 'two words'})

    def test_appends_keep_earlier_lines(self):
        log = MetricsLog(self.root / 'metrics.log')
        log.append({'epoch': 0, 'split': 'train', 'loss': 2.0})
        first = log.path.read_bytes()
        log.extend([{'epoch': 0, 'split': 'validation', 'accuracy': 0.5},
                    {'epoch': 1, 'split': 'train', 'loss': 1.5}])
        after = log.path.read_bytes()
        self.assertTrue(after.startswith(first))
        self.assertEqual(after.count(b'\n'), 3)

    def test_rejected_record_writes_nothing(self):
        log = MetricsLog(self.root / 'metrics.log')
        log.append({'epoch': 0, 'loss': 1.0})
        before = log.path.read_bytes()
        with self.assertRaises(ValueError):
            log.extend([{'epoch': 1, 'loss': 0.5}, {'note': 'two words'}])
        self.assertEqual(log.path.read_bytes(), before)
        self.assertEqual(len(log.records), 1)

    def test_new_log_starts_empty(self):
        path = self.root / 'metrics.log'
        path.write_text('epoch=9 loss=1.0\n')
        MetricsLog(path)
        self.assertEqual(path.read_text(), '')

    def test_malformed_line(self):
        path = self.root / 'metrics.log'
        path.write_text('epoch=0 loss=1.0\nepoch=1 broken\n')
        with self.assertRaises(DataFormatError) as context:
            read_metrics(path)
        self.assertIn('line 2', str(context.exception))

    def test_missing_log(self):
        with self.assertRaises(FileNotFoundError):
            read_metrics(self.root / 'absent.log')


class TestComparisonTable(TempDirTestCase):
    """Test architecture comparison tables."""

    def setUp(self):
        super().setUp()
        self.runs = pd.DataFrame({
            'architecture': ['D([1][1],[20,5,40k])'] * 2 + ['D([10,10],[1,5,40k])'] * 2
                            + ['D([10,0],[1,5,40k])'] * 3 + ['D([5,0],[2,5,40k])'],
            'dataset': ['mnist'] * 8,
            'seed': [0, 1, 0, 1, 0, 1, 2, 0],
            'best_epoch': [10] * 8,
            'val_accuracy': [0.9] * 8,
            'test_accuracy': [0.98, 0.982, 0.96, 0.962, 0.90, 0.91, 0.92, 0.93],
        })
        self.exporter = ComparisonTableExporter()

    def test_family_ordering_and_format(self):
        table = self.exporter.create_comparison_table(self.runs)
        self.assertEqual(table['architecture'].tolist(), [
            'D([10,0],[1,5,40k])', 'D([5,0],[2,5,40k])',
            'D([10,10],[1,5,40k])', 'D([1][1],[20,5,40k])'])
        self.assertEqual(table.loc[0, 'accuracy'], '91.00 ± 1.00')
        self.assertEqual(table.loc[1, 'accuracy'], '93.00 ± 0.00 (n=1)')
        self.assertEqual(table.loc[3, 'family'], 'split differential')

    def test_welch_against_standard_design(self):
        table = self.exporter.create_comparison_table(self.runs).set_index('architecture')
        self.assertTrue(np.isnan(table.loc['D([10,0],[1,5,40k])', 'p_value']))
        self.assertTrue(np.isnan(table.loc['D([5,0],[2,5,40k])', 'p_value']))
        self.assertLess(table.loc['D([10,10],[1,5,40k])', 'p_value'], 0.05)
        self.assertNotEqual(table.loc['D([10,10],[1,5,40k])', 'significance'], 'ns')

    def test_p_values_match_reference_comparison(self):
        table = self.exporter.create_comparison_table(self.runs).set_index('architecture')
        reference = StatisticsEngine().compare_to_reference(
            self.runs, 'D([10,0],[1,5,40k])').set_index('architecture')
        for architecture in ('D([10,10],[1,5,40k])', 'D([1][1],[20,5,40k])'):
            self.assertEqual(table.loc[architecture, 'p_value'],
                             reference.loc[architecture, 'p_value'])

    def test_reference_is_per_dataset(self):
        fashion = self.runs.assign(dataset='fashion',
                                   test_accuracy=self.runs['test_accuracy'] - 0.05)
        fashion = fashion[fashion['architecture'] != 'D([10,0],[1,5,40k])']
        table = self.exporter.create_comparison_table(pd.concat([self.runs, fashion]))
        untested = table[table['dataset'] == 'fashion']
        self.assertTrue(untested['p_value'].isna().all())
        self.assertEqual(set(untested['significance']), {''})

    def test_collect_runs(self):
        for index, (architecture, group) in enumerate(self.runs.groupby('architecture')):
            run_dir = self.root / f"run{index}"
            run_dir.mkdir()
            group.to_csv(run_dir / 'runs.csv', index=False)
        runs = ComparisonTableExporter.collect_runs(sorted(self.root.iterdir()))
        self.assertEqual(len(runs), len(self.runs))
        with self.assertRaises(FileNotFoundError):
            ComparisonTableExporter.collect_runs([self.root / 'run0', self.root / 'missing'])

    def test_export_all(self):
        table = self.exporter.create_comparison_table(self.runs)
        written = self.exporter.export_all(table, self.root / 'tables', excel=True)
        self.assertEqual([path.name for path in written],
                         ['comparison.txt', 'comparison.csv', 'comparison.xlsx'])

        text = written[0].read_text(encoding='utf-8').splitlines()
        self.assertTrue(text[0].startswith('architecture'))
        self.assertIn('D([10,0],[1,5,40k])', text[2])
        self.assertIn('91.00 ± 1.00', text[2])
        self.assertEqual(pd.read_csv(written[1])['accuracy'].tolist(), table['accuracy'].tolist())

        sheet = load_workbook(written[2])['Comparison']
        self.assertEqual(sheet.cell(row=1, column=1).value, 'architecture')
        self.assertEqual(sheet.cell(row=2, column=1).value, 'D([10,0],[1,5,40k])')
        self.assertIsNone(sheet.cell(row=2, column=8).value)

    def test_empty_table_text(self):
        self.assertEqual(ComparisonTableExporter.format_text(pd.DataFrame()), '')


class TestOutputFiles(TempDirTestCase):
    """Test atomic writes, the output lock and field dumps."""

    def test_atomic_write_replaces(self):
        path = self.root / 'nested' / 'file.txt'
        atomic_write(path, 'first')
        atomic_write(path, b'second')
        self.assertEqual(path.read_text(), 'second')
        self.assertEqual([item.name for item in path.parent.iterdir()], ['file.txt'])

    def test_lock_is_exclusive(self):
        with OutputLock(self.root / 'out') as lock:
            self.assertTrue(lock.held)
            with self.assertRaises(ConfigError):
                OutputLock(self.root / 'out').acquire()
        self.assertFalse((self.root / 'out' / '.lock').exists())
        with OutputLock(self.root / 'out'):
            pass

    def test_raw_field_round_trip(self):
        values = np.random.default_rng(3).normal(size=(8, 8)) \
            + 1j * np.random.default_rng(4).normal(size=(8, 8))
        png, raw = dump_field(ComplexField(values, pitch=0.25), self.root / 'output', 0.75)
        self.assertEqual(png.read_bytes()[:8], b'\x89PNG\r\n\x1a\n')
        field, header = read_raw(raw)
        np.testing.assert_array_equal(field.values, values)
        self.assertEqual(field.pitch, 0.25)
        self.assertEqual(float(header['wavelength']), 0.75)

    def test_truncated_raw_dump(self):
        _, raw = dump_field(ComplexField.plane_wave(4), self.root / 'plane')
        raw.write_bytes(raw.read_bytes()[:-3])
        with self.assertRaises(DataFormatError):
            read_raw(raw)

    def test_dump_stages(self):
        system = learnable_system()
        field = ComplexField(np.random.default_rng(5).uniform(size=(2, 16, 16)) + 0j)
        stages = system.run(field, capture=True).stages[0]
        written = dump_stages(stages, self.root / 'stages', system.pitch, prefix='net0_', sample=1)
        names = sorted(path.name for path in written)
        self.assertEqual(names, sorted(f"net0_{stage}{suffix}"
                                       for stage in ('input', 'layer0', 'layer1', 'output')
                                       for suffix in ('.png', '.f64')))
        output, _ = read_raw(self.root / 'stages' / 'net0_output.f64')
        np.testing.assert_array_equal(output.values, stages.output[1])


if __name__ == '__main__':
    unittest.main()
