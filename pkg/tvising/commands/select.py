import argparse
import logging

from ..models import Criterion, DimConvention, EdgeRule, Method, SearchSpec, SearchStrategy
from ..selection import search
from ..storage import load_config, load_dataset, save_search, trace_frame, write_csv
from ..experiment import method_search
from .options import add_model_flags, add_solver_flags, solver_options

logger = logging.getLogger(__name__)


def _spec(args: argparse.Namespace) -> SearchSpec:
    spec = load_config(args.config, SearchSpec) if args.config else SearchSpec()
    overrides = {}
    if args.criterion:
        overrides["criterion"] = Criterion(args.criterion)
    if args.strategy:
        overrides["strategy"] = SearchStrategy(args.strategy)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        spec = SearchSpec.model_validate({**spec.model_dump(), **overrides})
    return method_search(spec, Method(args.method))


def cmd_select(args: argparse.Namespace) -> int:
    spec = _spec(args)
    dataset = load_dataset(args.dataset)
    holdout = load_dataset(args.holdout) if args.holdout else None
    result = search(
        dataset,
        holdout,
        spec,
        Method(args.method).fused_norm,
        solver_options(args),
        args.tau_cp,
        args.tau_sparse,
        DimConvention(args.dim_convention),
        rule=EdgeRule(args.edge_rule),
        workers=args.threads,
    )
    save_search(args.out, result)
    write_csv(args.trace, trace_frame(result.trace))
    print(f"best {spec.criterion.value}={result.value:.6g} at lambda1={result.lambda1:.6g}, lambda2={result.lambda2:.6g}")
    return 0


def register(subparsers):
    parser = subparsers.add_parser("select", help="search (lambda1, lambda2) by AIC or held-out AUC")
    parser.add_argument("dataset")
    parser.add_argument("--holdout", default=None, help="held-out SpinDataset, required for AUC")
    parser.add_argument("--config", default=None, help="search spec (YAML or JSON)")
    parser.add_argument("--criterion", choices=[c.value for c in Criterion], default=None)
    parser.add_argument("--strategy", choices=[s.value for s in SearchStrategy], default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--dim-convention", choices=[d.value for d in DimConvention],
                        default=DimConvention.repeat_first.value)
    parser.add_argument("--out", default="best.json")
    parser.add_argument("--trace", default="trace.csv")
    add_model_flags(parser)
    add_solver_flags(parser)
    parser.set_defaults(handler=cmd_select)
