"""Command-line interface for Diffractive Classifier."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .core.architecture import EnsembleCandidate, EnsembleSystem, parse_notation, select_ensemble
from .core.exceptions import (
    ConfigError,
    DataFormatError,
    DiffractiveError,
    NumericError,
)
from .core.exporters import (
    ComparisonTableExporter,
    MetricsLog,
    OutputLock,
    atomic_write,
    dump_stages,
    load_checkpoint,
    save_checkpoint,
    save_layouts,
)
from .core.exporters.table_exporter import RUN_COLUMNS, RUNS_FILE
from .core.importers import load_dataset
from .core.models import Dataset
from .core.plotters import IntensityPlotter, PlotConfig, PlotExporter, ScorePlotter
from .core.processors import EncodingSpec, encode
from .core.profiles import SCALES, ExperimentConfig
from .core.training import collect_signals, evaluate, run_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

CHECKPOINT_SUFFIX = '.ckpt'
BEST_CHECKPOINT = 'best.ckpt'
METRICS_FILE = 'metrics.log'


class CLIArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def seed_list(text: str) -> List[int]:
    """Parse '0,1,2' (or '0-2') into a list of seeds."""
    seeds: List[int] = []
    try:
        for part in text.split(','):
            part = part.strip()
            if '-' in part[1:]:
                start, end = part.split('-', 1)
                seeds.extend(range(int(start), int(end) + 1))
            elif part:
                seeds.append(int(part))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid seed list {text!r}") from exc
    if not seeds:
        raise argparse.ArgumentTypeError("seed list is empty")
    return seeds


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser."""
    parser = CLIArgumentParser(
        prog="diffractive-classifier",
        description="Diffractive Classifier - simulate and train diffractive optical networks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Train the standard design at desk scale
  diffractive-classifier train --scale desk --notation "D([10,0],[1,5,40k])" --out runs/std

  # Evaluate a checkpoint on the test split
  diffractive-classifier eval runs/std/seed0/best.ckpt

  # Ensemble of three units, choosing epochs on the validation split
  diffractive-classifier eval runs/a/seed0 runs/b/seed0 runs/c/seed0 --ensemble --top-k 3

  # Comparison table of several runs
  diffractive-classifier table runs/std runs/diff --out tables

  # Intensity maps and score bars of one test image
  diffractive-classifier render runs/std/seed0/best.ckpt --index 7 --out figures

  # Check a notation string
  diffractive-classifier parse "D([5][5],[4,5,40k])"
"""
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings only")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    data_args = CLIArgumentParser(add_help=False)
    data_args.add_argument("--dataset", choices=["mnist", "fashion", "cifar10"],
                           help="Dataset (default: from config or checkpoint)")
    data_args.add_argument("--data-root", help="Dataset root (default: $DIFFRACTIVE_DATA_ROOT)")

    train_parser = subparsers.add_parser("train", parents=[data_args],
                                         help="Train repetitions of one architecture")
    train_parser.add_argument("--config", help="Experiment configuration (JSON)")
    train_parser.add_argument("--notation", help="Architecture, e.g. 'D([10,10],[1,5,40k])'")
    train_parser.add_argument("--seed", type=seed_list, help="Seeds, e.g. 0,1,2")
    train_parser.add_argument("--scale", choices=SCALES, help="Preset scale")
    train_parser.add_argument("--out", help="Output directory")
    train_parser.add_argument("--ensemble", action="store_true",
                              help="Keep a checkpoint after every epoch (ensemble candidates)")
    train_parser.add_argument("--epochs", type=int, help="Override the number of epochs")

    eval_parser = subparsers.add_parser("eval", parents=[data_args],
                                        help="Evaluate checkpoints or an ensemble")
    eval_parser.add_argument("checkpoints", nargs="+",
                             help="Checkpoint files (or, with --ensemble, unit directories)")
    eval_parser.add_argument("--split", choices=["train", "validation", "test"], default="test")
    eval_parser.add_argument("--ensemble", action="store_true",
                             help="Sum the detector signals of all units")
    eval_parser.add_argument("--top-k", type=int, default=3,
                             help="Candidates kept per unit during ensemble selection")
    eval_parser.add_argument("--out", help="Directory for the confusion matrix CSV")

    table_parser = subparsers.add_parser("table", help="Comparison table of completed runs")
    table_parser.add_argument("runs", nargs="+", help="Run directories")
    table_parser.add_argument("--out", default=".", help="Directory for the table files")
    table_parser.add_argument("--excel", action="store_true", help="Also write an .xlsx table")

    render_parser = subparsers.add_parser("render", parents=[data_args],
                                          help="Render intensity maps of one sample")
    render_parser.add_argument("checkpoints", nargs="+",
                               help="Checkpoint file (several: render their incoherent ensemble)")
    render_parser.add_argument("--index", type=int, default=0, help="Sample index in the split")
    render_parser.add_argument("--split", choices=["train", "validation", "test"], default="test")
    render_parser.add_argument("--out", default="render", help="Output directory")
    render_parser.add_argument("--dump-fields", action="store_true",
                               help="Also dump every stage as PNG + raw .f64")
    render_parser.add_argument("--format", default="png", help="Figure format")
    render_parser.add_argument("--plot-config", help="Plot styling (JSON: colors, colormaps)")

    parse_parser = subparsers.add_parser("parse", help="Check an architecture notation")
    parse_parser.add_argument("notation", help="Notation string")
    parse_parser.add_argument("--classes", type=int, default=None, help="Number of classes M")

    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)


def _experiment_config(args) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.load(Path(args.config))
    elif args.scale:
        config = ExperimentConfig.preset(args.scale, dataset=args.dataset or 'mnist')
    else:
        config = ExperimentConfig()
    data = config.to_dict()
    flags = {
        'notation': args.notation,
        'dataset': args.dataset,
        'seeds': args.seed,
        'out_dir': args.out,
        'data_root': args.data_root,
    }
    data.update({key: value for key, value in flags.items() if value is not None})
    if args.ensemble:
        data['keep_epoch_checkpoints'] = True
    if args.epochs is not None:
        data['train']['epochs'] = args.epochs
    return ExperimentConfig.from_dict(data)


def _data_metadata(config: ExperimentConfig, encoding: EncodingSpec) -> Dict:
    return {
        'dataset': config.dataset,
        'split_seed': config.split_seed,
        'train_size': config.train_size,
        'validation_size': config.validation_size,
        'test_size': config.test_size,
        'encoding': encoding.to_dict(),
    }


def cmd_train(args) -> int:
    """Train repetitions and write checkpoints, metrics and a report row."""
    config = _experiment_config(args)
    out_dir = Path(config.out_dir)

    with OutputLock(out_dir):
        config.save(out_dir / 'config.json')
        dataset = load_dataset(config.dataset, config.data_root, seed=config.split_seed,
                               train_size=config.train_size,
                               validation_size=config.validation_size,
                               test_size=config.test_size)
        spec = config.resolved_spec(dataset.num_classes)
        encoding = config.resolved_encoding()
        data_meta = _data_metadata(config, encoding)
        logs: Dict[int, MetricsLog] = {}

        def on_epoch(seed: int):
            seed_dir = out_dir / f"seed{seed}"
            logs[seed] = MetricsLog(seed_dir / METRICS_FILE)

            def callback(epoch, system, state, records):
                logs[seed].extend({'seed': seed, **record} for record in records)
                if config.keep_epoch_checkpoints:
                    save_checkpoint(seed_dir / f"epoch{epoch:03d}{CHECKPOINT_SUFFIX}", system,
                                    state.optimizer,
                                    {**data_meta, 'seed': seed, 'epoch': epoch,
                                     'val_accuracy': records[-1]['accuracy']})
            return callback

        report = run_experiment(spec, dataset, config.train, encoding, config.seed_list,
                                build_system=config.build_system, on_epoch=on_epoch)

        for rep in report.repetitions:
            seed_dir = out_dir / f"seed{rep.seed}"
            save_checkpoint(seed_dir / BEST_CHECKPOINT, rep.fit.system, rep.fit.state.optimizer,
                            {**data_meta, 'seed': rep.seed, 'epoch': rep.best_epoch,
                             'val_accuracy': rep.val_accuracy,
                             'test_accuracy': rep.test_accuracy})
            logs[rep.seed].append({'seed': rep.seed, 'epoch': rep.best_epoch, 'split': 'test',
                                   'accuracy': rep.test_accuracy})
        save_layouts(report.repetitions[0].fit.system.layouts, out_dir / 'layouts.json')

        runs = report.to_frame()
        runs.insert(0, 'dataset', report.dataset_id)
        runs.insert(0, 'architecture', report.notation)
        atomic_write(out_dir / RUNS_FILE, runs[RUN_COLUMNS].to_csv(index=False))
        row = f"{report.notation} | {report.dataset_id} | {report.format_accuracy()}\n"
        atomic_write(out_dir / 'report.txt', row)

    print(row, end='')
    return EXIT_OK


def _load_data_for(metadata: Dict, args) -> Dataset:
    dataset_id = args.dataset or metadata.get('dataset')
    if dataset_id is None:
        raise ConfigError("the checkpoint does not name its dataset; pass --dataset")
    return load_dataset(dataset_id, args.data_root, seed=metadata.get('split_seed', 0),
                        train_size=metadata.get('train_size'),
                        validation_size=metadata.get('validation_size', 5000),
                        test_size=metadata.get('test_size'))


def _encoding_for(metadata: Dict, dataset_id: str) -> EncodingSpec:
    if metadata.get('encoding'):
        return EncodingSpec.from_dict(metadata['encoding'])
    return EncodingSpec.for_dataset(dataset_id)


def _unit_candidates(path: Path) -> List[Path]:
    """A checkpoint file, or every checkpoint of a unit directory in name order."""
    if path.is_dir():
        found = sorted(path.glob(f"epoch*{CHECKPOINT_SUFFIX}"))
        if not found and (path / BEST_CHECKPOINT).is_file():
            found = [path / BEST_CHECKPOINT]
        if not found:
            raise FileNotFoundError(f"no checkpoints in {path}")
        return found
    return [path]


def _print_evaluation(result, title: str) -> None:
    print("=" * 60)
    print(title)
    print("=" * 60)
    print(result.summary())
    print("\nPer-class accuracy:")
    for class_id, value in result.per_class_accuracy.items():
        text = 'n/a' if pd.isna(value) else f"{value:.4f}"
        print(f"  {class_id}: {text}")
    print("\nConfusion matrix (rows: true, columns: predicted):")
    print(result.confusion.to_string())


def cmd_eval(args) -> int:
    """Evaluate one checkpoint, or an ensemble of units."""
    paths = [Path(item) for item in args.checkpoints]
    if not args.ensemble:
        if len(paths) != 1 or paths[0].is_dir():
            raise ConfigError("plain evaluation takes one checkpoint file; use --ensemble for more")
    unit_paths = [_unit_candidates(path) for path in paths]
    first = load_checkpoint(unit_paths[0][0])
    metadata = first.metadata
    dataset = _load_data_for(metadata, args)
    encoding = _encoding_for(metadata, dataset.dataset_id)
    split = dataset.split(args.split)

    if not args.ensemble:
        result = evaluate(first.system, split, encoding)
        title = f"{first.system.spec.render()} on {dataset.dataset_id}/{args.split}"
    else:
        units = [[load_checkpoint(path) for path in candidates] for candidates in unit_paths]
        if all(len(unit) == 1 for unit in units):
            model = EnsembleSystem([unit[0].system for unit in units])
        else:
            validation = dataset.validation
            candidates = [
                [EnsembleCandidate(str(path), checkpoint.system,
                                   collect_signals(checkpoint.system, validation, encoding))
                 for path, checkpoint in zip(candidate_paths, unit)]
                for candidate_paths, unit in zip(unit_paths, units)
            ]
            selection = select_ensemble(candidates, validation.labels, args.top_k)
            print(f"Selected {', '.join(selection.combination)} "
                  f"(validation accuracy {selection.accuracy:.4f}, "
                  f"{selection.combinations_evaluated} combinations)")
            model = selection.ensemble
        result = evaluate(model, split, encoding)
        title = f"Ensemble of {len(model.units)} x {model.reference.spec.render()} on " \
                f"{dataset.dataset_id}/{args.split}"

    _print_evaluation(result, title)
    if args.out:
        out_dir = Path(args.out)
        with OutputLock(out_dir):
            atomic_write(out_dir / f"confusion_{args.split}.csv", result.confusion.to_csv())
    return EXIT_OK


def cmd_table(args) -> int:
    """Comparison table of completed run directories."""
    exporter = ComparisonTableExporter()
    runs = exporter.collect_runs([Path(run) for run in args.runs])
    table = exporter.create_comparison_table(runs)
    out_dir = Path(args.out)
    with OutputLock(out_dir):
        exporter.export_all(table, out_dir, excel=args.excel)
    print(exporter.format_text(table), end='')
    return EXIT_OK


def _plot_config(path: Optional[str]) -> PlotConfig:
    if path is None:
        return PlotConfig()
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"File not found: {path}")
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid plot configuration {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"plot configuration {path} must be a JSON object")
    return PlotConfig.from_dict(data)


def cmd_render(args) -> int:
    """Input object, output-plane maps with detectors and signal/score bars of one sample.

    Several checkpoints render their incoherent ensemble: plane maps show the
    summed unit intensities and the bars the summed detector signals.
    """
    checkpoints = [load_checkpoint(Path(path)) for path in args.checkpoints]
    system = checkpoints[0].system
    ensemble = (EnsembleSystem([checkpoint.system for checkpoint in checkpoints])
                if len(checkpoints) > 1 else None)
    plot_config = _plot_config(args.plot_config)
    dataset = _load_data_for(checkpoints[0].metadata, args)
    encoding = _encoding_for(checkpoints[0].metadata, dataset.dataset_id)
    split = dataset.split(args.split)
    if not 0 <= args.index < len(split):
        raise ConfigError(f"sample index {args.index} out of range for {len(split)} "
                          f"{args.split} images")

    image = split[args.index]
    field = encode(image, encoding, system.grid_size, system.pitch)
    if ensemble is None:
        system_pass = system.run(field, capture=args.dump_fields)
        intensities = [output.intensity() for output in system_pass.outputs]
        positive, negative = system_pass.positive, system_pass.negative
        raw = system_pass.scores.raw
        unit_passes = [system_pass]
    else:
        intensities = ensemble.output_intensity(field)
        signals = ensemble.detector_signals(field)
        positive, negative = system.route_signals(signals)
        raw = system.scores_from_signals(signals).raw
        unit_passes = ([unit.run(field, capture=True) for unit in ensemble.units]
                       if args.dump_fields else [])

    out_dir = Path(args.out)
    with OutputLock(out_dir):
        exporter = PlotExporter(out_dir)
        maps = IntensityPlotter(plot_config)
        bars = ScorePlotter(plot_config)
        label = f" ({len(ensemble.units)} units)" if ensemble is not None else ""
        figures = {
            'input': maps.create_input_image(field.values, system.pitch,
                                             title=f"Input (label {image.label})",
                                             phase=encoding.mode == 'phase'),
        }
        for index, (intensity, layout) in enumerate(zip(intensities, system.layouts)):
            figures[f"plane{index}"] = maps.create_intensity_map(
                intensity, system.pitch, layout, title=f"Output plane {index}{label}")
        if len(intensities) > 1:
            figures['planes'] = maps.create_plane_grid(intensities, system.pitch, system.layouts)
        figures['signals'] = bars.create_signal_bars(positive, negative)
        figures['scores'] = bars.create_score_bars(raw)
        exporter.export_multiple_figures(figures, [args.format])
        atomic_write(out_dir / 'plot_config.json',
                     json.dumps(plot_config.to_dict(), indent=2) + '\n')

        if args.dump_fields:
            for unit, unit_pass in enumerate(unit_passes):
                unit_prefix = f"unit{unit}_" if ensemble is not None else ""
                for index, stages in enumerate(unit_pass.stages):
                    dump_stages(stages, out_dir / 'fields', system.pitch,
                                system.geometry.wavelength, prefix=f"{unit_prefix}net{index}_")

    print(f"Label {image.label}, predicted {int(np.argmax(raw))}; figures in {out_dir}")
    return EXIT_OK


def cmd_parse(args) -> int:
    """Parse a notation and print its canonical form."""
    spec = parse_notation(args.notation, num_classes=args.classes)
    print(spec.render())
    print(f"  family:            {spec.family}")
    print(f"  networks:          {spec.n_networks}")
    print(f"  layers/network:    {spec.layers_per_network}")
    print(f"  neurons/layer:     {spec.neurons_per_layer} ({spec.grid_size}x{spec.grid_size})")
    print(f"  total neurons:     {spec.total_neurons}")
    print(f"  learnable p/n:     {'yes' if spec.learnable_coefficients else 'no'}")
    if spec.num_classes is not None:
        for network, classes in enumerate(spec.class_groups()):
            print(f"  network {network}: classes {classes}")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "table": cmd_table,
    "render": cmd_render,
    "parse": cmd_parse,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point."""
    parser = create_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_OK

    configure_logging(args.verbose, args.quiet)
    try:
        return COMMANDS[args.command](args) or EXIT_OK
    except KeyboardInterrupt:
        print("\nAborted.", file=sys.stderr)
        return 130
    except NumericError as e:
        print(f"Numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataFormatError, FileNotFoundError) as e:
        print(f"Data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (DiffractiveError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
