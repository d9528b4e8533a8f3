import argparse

from ..ingest import cumulative_curves, ingest
from ..models import MissingPolicy
from ..storage import save_dataset, write_csv


def cmd_ingest(args: argparse.Namespace) -> int:
    result = ingest(
        args.csv,
        MissingPolicy(args.missing_policy),
        args.groups,
        args.bin,
        args.zero_one,
    )
    save_dataset(args.out, result.dataset)
    if args.curves:
        write_csv(args.curves, cumulative_curves(result.dataset, result.columns))
    print(
        f"n={result.dataset.n}, p={result.dataset.p}, "
        f"{result.dropped_rows} row(s) dropped, {result.imputed} entr(ies) imputed"
    )
    return 0


def register(subparsers):
    parser = subparsers.add_parser("ingest", help="turn a CSV of ±1/blank entries into a SpinDataset")
    parser.add_argument("csv")
    parser.add_argument("--out", default="dataset.json")
    parser.add_argument("--missing-policy", choices=[m.value for m in MissingPolicy], default=MissingPolicy.drop.value)
    parser.add_argument("--groups", default=None, help="CSV with header node,group")
    parser.add_argument("--bin", type=int, default=1, help="rows per timestamp")
    parser.add_argument("--zero-one", action="store_true", help="input is 0/1; 0 maps to -1")
    parser.add_argument("--curves", default=None, help="write cumulative per-node curves (CSV)")
    parser.set_defaults(handler=cmd_ingest)
