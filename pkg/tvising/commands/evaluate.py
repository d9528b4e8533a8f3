import argparse
import json

from ..metrics import evaluate
from ..models import F1Averaging
from ..storage import load_estimated, load_piecewise, save_report


def cmd_evaluate(args: argparse.Namespace) -> int:
    report = evaluate(load_piecewise(args.truth), load_estimated(args.model), F1Averaging(args.averaging))
    if args.out:
        save_report(args.out, report)
    print(json.dumps(report.model_dump(), indent=2))
    return 0


def register(subparsers):
    parser = subparsers.add_parser("evaluate", help="score an estimated model against the true one")
    parser.add_argument("model", help="estimated model JSON (from fit)")
    parser.add_argument("truth", help="true piece-wise model JSON (from generate)")
    parser.add_argument("--averaging", choices=[a.value for a in F1Averaging], default=F1Averaging.of_means.value)
    parser.add_argument("--out", default=None, help="write the report here as well")
    parser.set_defaults(handler=cmd_evaluate)
