import argparse

from ..experiment import run_experiment
from ..models import ExperimentConfig
from ..storage import load_config


def cmd_experiment(args: argparse.Namespace) -> int:
    config = load_config(args.config, ExperimentConfig)
    if args.output_dir:
        config = config.model_copy(update={"output_dir": args.output_dir})
    result = run_experiment(config)
    print(result.results.to_string(index=False))
    if result.failures:
        print(f"{result.failures} run(s) failed; see run_log.jsonl")
    return 0


def register(subparsers):
    parser = subparsers.add_parser("experiment", help="multi-seed benchmark with aggregated results")
    parser.add_argument("config", help="experiment config (YAML or JSON)")
    parser.add_argument("--output-dir", default=None, help="override output_dir from the config")
    parser.set_defaults(handler=cmd_experiment)
