"""
Command-line entry point.

    python experiment_cli.py run --config mnist.cfg --seed 1
    python experiment_cli.py pretrain --config mnist.cfg --override epochs_pretrain=5
    python experiment_cli.py compress --config prune.cfg --checkpoint runs/pretrained.ckpt
    python experiment_cli.py evaluate --config mnist.cfg --checkpoint runs/model.ckpt
    python experiment_cli.py report --config prune.cfg --baseline runs/pretrained.ckpt --checkpoint runs/model.ckpt
    python experiment_cli.py grid --config mnist.cfg --override "grid=mode=prune,sparsity=0.5;mode=quantize,bitwidth=2"
    python experiment_cli.py checkpoints --out-dir runs

Without --checkpoint / --baseline, compress and report use pretrained.ckpt
and evaluate and report use model.ckpt from the output directory.
"""

import argparse
import sys

from experiment_runner import COMPRESSED, PRETRAINED, ExperimentRunner, run_experiment, run_grid
from logger_utils import logger
from snn.errors import ConfigError, SnnError
from src.checkpoint import CheckpointManager
from utils.config import ExperimentConfig, load_config

COMMANDS = ("pretrain", "compress", "evaluate", "report", "run", "grid", "checkpoints")


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description="Train and compress spiking neural networks")
    parser.add_argument("command", choices=COMMANDS, help="Pipeline stage to execute")
    parser.add_argument("--config", help="Flat key=value experiment config file")
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one config key (repeatable)",
    )
    parser.add_argument("--data-dir", help="Directory holding the MNIST IDX files")
    parser.add_argument("--out-dir", help="Directory for checkpoints and CSV outputs")
    parser.add_argument("--seed", type=int, help="Experiment root seed")
    parser.add_argument("--checkpoint", help="Input checkpoint (compress, evaluate, report)")
    parser.add_argument("--baseline", help="Baseline checkpoint for report")
    return parser.parse_args(argv)


def list_checkpoints(out_dir: str) -> None:
    for entry in CheckpointManager(out_dir).list_checkpoints():
        print(entry)


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        if args.command == "checkpoints":
            list_checkpoints(args.out_dir or ExperimentConfig().out_dir)
            return 0

        config = load_config(args.config, args.override, data_dir=args.data_dir, out_dir=args.out_dir,
                             seed=args.seed, checkpoint=args.checkpoint)
        runner = ExperimentRunner(config)

        if args.command == "run":
            report = run_experiment(config)
            print(report.to_row())
        elif args.command == "grid":
            for report in run_grid(config):
                print(report.to_row())
        elif args.command == "pretrain":
            runner.pretrain()
        elif args.command == "compress":
            checkpoint = runner.stored(PRETRAINED, config.checkpoint)
            runner.compress(checkpoint.to_network(), start_epoch=checkpoint.epoch)
        elif args.command == "evaluate":
            result = runner.evaluate(runner.stored(COMPRESSED, config.checkpoint).to_network())
            print(result.describe())
        elif args.command == "report":
            baseline = runner.stored(PRETRAINED, args.baseline)
            compressed = runner.stored(COMPRESSED, config.checkpoint)
            report = runner.report(baseline.to_network(), compressed.to_network())
            print(report.to_row())
        return 0
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except SnnError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
