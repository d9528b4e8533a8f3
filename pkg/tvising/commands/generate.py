import argparse
import logging
from pathlib import Path

from ..ising import diagnostics
from ..models import ScenarioConfig
from ..sampler import generate_scenario
from ..storage import load_config, save_dataset, save_diagnostics, save_piecewise

logger = logging.getLogger(__name__)


def cmd_generate(args: argparse.Namespace) -> int:
    """Sample a scenario and write train/holdout data, the true model and its diagnostics."""
    config = load_config(args.config, ScenarioConfig) if args.config else ScenarioConfig()
    if args.seed is not None:
        config = ScenarioConfig.model_validate({**config.model_dump(), "seed": args.seed})
    scenario = generate_scenario(config)

    out = Path(args.out)
    suffix = f".{args.format}"
    save_dataset(out / f"train{suffix}", scenario.train)
    if scenario.holdout is not None:
        save_dataset(out / f"holdout{suffix}", scenario.holdout)
    save_piecewise(out / "truth.json", scenario.model)
    save_diagnostics(out / "diagnostics.json", diagnostics(scenario.model))
    logger.info("scenario written to %s", out)
    return 0


def register(subparsers):
    parser = subparsers.add_parser("generate", help="sample a synthetic piece-wise constant scenario")
    parser.add_argument("config", nargs="?", help="scenario config (YAML or JSON); defaults if omitted")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--format", choices=["json", "csv"], default="json", help="dataset file format")
    parser.set_defaults(handler=cmd_generate)
